#include "rvbus/property.hpp"

#include <cctype>
#include <set>
#include <sstream>

namespace rvbus {

namespace {

enum class Tok {
    End, Ident, String, Int, Star, LBrace, RBrace, LBracket, RBracket,
    LParen, RParen, Colon, Comma, Dot, Arrow
};

struct Token {
    Tok kind = Tok::End;
    std::string text;
    std::int64_t number = 0;
    std::size_t pos = 0;
};

class Lexer {
  public:
    explicit Lexer(const std::string& text) : text_(text) { advance(); }

    const Token& peek() const { return current_; }

    Token take() {
        Token t = current_;
        advance();
        return t;
    }

  private:
    void advance() {
        while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
        current_ = Token{};
        current_.pos = i_;
        if (i_ >= text_.size()) return;
        char c = text_[i_];
        auto single = [&](Tok k) {
            current_.kind = k;
            current_.text = std::string(1, c);
            ++i_;
        };
        switch (c) {
            case '{': return single(Tok::LBrace);
            case '}': return single(Tok::RBrace);
            case '[': return single(Tok::LBracket);
            case ']': return single(Tok::RBracket);
            case '(': return single(Tok::LParen);
            case ')': return single(Tok::RParen);
            case ':': return single(Tok::Colon);
            case ',': return single(Tok::Comma);
            case '.': return single(Tok::Dot);
            case '*': return single(Tok::Star);
            default: break;
        }
        if (c == '-' && i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
            current_.kind = Tok::Arrow;
            current_.text = "->";
            i_ += 2;
            return;
        }
        if (c == '"') {
            std::size_t start = i_++;
            std::string out;
            while (i_ < text_.size() && text_[i_] != '"') {
                if (text_[i_] == '\\' && i_ + 1 < text_.size()) ++i_;
                out.push_back(text_[i_++]);
            }
            if (i_ >= text_.size()) throw PropertyParseError("unterminated string", start);
            ++i_;
            current_.kind = Tok::String;
            current_.text = std::move(out);
            return;
        }
        if (c == '-' || std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t start = i_;
            if (c == '-') ++i_;
            while (i_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[i_]))) ++i_;
            if (i_ == start + (c == '-' ? 1u : 0u))
                throw PropertyParseError("expected number", start);
            current_.kind = Tok::Int;
            current_.text = text_.substr(start, i_ - start);
            current_.number = std::stoll(current_.text);
            return;
        }
        if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '/') {
            std::size_t start = i_;
            while (i_ < text_.size() &&
                   (std::isalnum(static_cast<unsigned char>(text_[i_])) || text_[i_] == '_' ||
                    text_[i_] == '/'))
                ++i_;
            current_.kind = Tok::Ident;
            current_.text = text_.substr(start, i_ - start);
            return;
        }
        throw PropertyParseError(std::string("unexpected character `") + c + "`", i_);
    }

    const std::string& text_;
    std::size_t i_ = 0;
    Token current_;
};

class Parser {
  public:
    explicit Parser(const std::string& text) : lex_(text) {}

    PropertyAst parse() {
        PropertyAst ast;
        // Flatten the quantifier prefix (possibly nested through parens).
        std::size_t open_parens = 0;
        while (true) {
            if (peek_is_ident("forall")) {
                lex_.take();
                expect(Tok::LBracket, "expected `[` after `forall`");
                Token var = expect(Tok::Ident, "expected variable name");
                expect(Tok::RBracket, "expected `]`");
                expect(Tok::Dot, "expected `.` after `forall[v]`");
                for (const auto& v : ast.variables)
                    if (v == var.text)
                        throw PropertyParseError("duplicate quantifier variable `" + var.text + "`",
                                                 var.pos);
                ast.variables.push_back(var.text);
                continue;
            }
            if (lex_.peek().kind == Tok::LParen && !ast.variables.empty()) {
                // Peek past an opening paren only to reach a nested forall;
                // anything else starts the body.
                Lexer probe = lex_;
                probe.take();
                if (probe.peek().kind == Tok::Ident && probe.peek().text == "forall") {
                    lex_.take();
                    ++open_parens;
                    continue;
                }
            }
            break;
        }
        ast.root = parse_implies();
        for (std::size_t i = 0; i < open_parens; ++i)
            expect(Tok::RParen, "expected `)` closing quantifier scope");
        if (lex_.peek().kind != Tok::End)
            throw PropertyParseError("trailing input after property", lex_.peek().pos);
        validate_bound_variables(ast);
        assign_once_ids(ast);
        return ast;
    }

  private:
    bool peek_is_ident(const char* word) const {
        return lex_.peek().kind == Tok::Ident && lex_.peek().text == word;
    }

    Token expect(Tok kind, const char* msg) {
        if (lex_.peek().kind != kind) throw PropertyParseError(msg, lex_.peek().pos);
        return lex_.take();
    }

    PropertyNodePtr parse_implies() {
        PropertyNodePtr lhs = parse_or();
        if (lex_.peek().kind == Tok::Arrow) {
            lex_.take();
            auto node = std::make_shared<PropertyNode>();
            node->kind = PropertyNode::Kind::Implies;
            node->left = lhs;
            node->right = parse_implies();
            return node;
        }
        return lhs;
    }

    PropertyNodePtr parse_or() {
        PropertyNodePtr lhs = parse_and();
        while (peek_is_ident("or")) {
            lex_.take();
            auto node = std::make_shared<PropertyNode>();
            node->kind = PropertyNode::Kind::Or;
            node->left = lhs;
            node->right = parse_and();
            lhs = node;
        }
        return lhs;
    }

    PropertyNodePtr parse_and() {
        PropertyNodePtr lhs = parse_unary();
        while (peek_is_ident("and")) {
            lex_.take();
            auto node = std::make_shared<PropertyNode>();
            node->kind = PropertyNode::Kind::And;
            node->left = lhs;
            node->right = parse_unary();
            lhs = node;
        }
        return lhs;
    }

    PropertyNodePtr parse_unary() {
        const Token& t = lex_.peek();
        if (t.kind == Tok::Ident && t.text == "not") {
            lex_.take();
            auto node = std::make_shared<PropertyNode>();
            node->kind = PropertyNode::Kind::Not;
            node->left = parse_unary();
            return node;
        }
        if (t.kind == Tok::Ident && t.text == "once") {
            lex_.take();
            auto node = std::make_shared<PropertyNode>();
            node->kind = PropertyNode::Kind::Once;
            if (lex_.peek().kind == Tok::LBracket) {
                lex_.take();
                Token lo = expect(Tok::Int, "expected lower bound");
                if (lo.number < 0) throw PropertyParseError("negative bound", lo.pos);
                node->once_lower = static_cast<std::uint64_t>(lo.number);
                expect(Tok::Colon, "expected `:` in once bound");
                if (lex_.peek().kind == Tok::Int) {
                    Token hi = lex_.take();
                    if (hi.number < 0) throw PropertyParseError("negative bound", hi.pos);
                    node->once_upper = static_cast<std::uint64_t>(hi.number);
                    if (*node->once_upper < node->once_lower)
                        throw PropertyParseError("once bound has lower > upper", hi.pos);
                }
                expect(Tok::RBracket, "expected `]`");
            }
            // Both once(P) and the Reelay-style once[1:]{...} are accepted.
            if (lex_.peek().kind == Tok::LParen) {
                lex_.take();
                node->left = parse_implies();
                expect(Tok::RParen, "expected `)`");
            } else if (lex_.peek().kind == Tok::LBrace) {
                node->left = parse_atom();
            } else {
                throw PropertyParseError("expected `(` or `{` after once", lex_.peek().pos);
            }
            return node;
        }
        if (t.kind == Tok::Ident && t.text == "forall")
            throw PropertyParseError("forall is only allowed as a prefix", t.pos);
        if (t.kind == Tok::LParen) {
            lex_.take();
            PropertyNodePtr inner = parse_implies();
            expect(Tok::RParen, "expected `)`");
            return inner;
        }
        if (t.kind == Tok::LBrace) return parse_atom();
        throw PropertyParseError("expected formula", t.pos);
    }

    PropertyNodePtr parse_atom() {
        expect(Tok::LBrace, "expected `{`");
        auto node = std::make_shared<PropertyNode>();
        node->kind = PropertyNode::Kind::Atom;
        if (lex_.peek().kind == Tok::RBrace) {
            lex_.take();
            return node;
        }
        while (true) {
            Token key = expect(Tok::Ident, "expected constraint key");
            expect(Tok::Colon, "expected `:`");
            AtomConstraint c;
            c.key = key.text;
            const Token& v = lex_.peek();
            if (v.kind == Tok::Star) {
                lex_.take();
                Token var = expect(Tok::Ident, "expected variable after `*`");
                c.variable = var.text;
            } else if (v.kind == Tok::String) {
                c.literal = FieldValue{lex_.take().text};
            } else if (v.kind == Tok::Int) {
                c.literal = FieldValue{lex_.take().number};
            } else if (v.kind == Tok::Ident && (v.text == "True" || v.text == "true")) {
                lex_.take();
                c.literal = FieldValue{true};
            } else if (v.kind == Tok::Ident && (v.text == "False" || v.text == "false")) {
                lex_.take();
                c.literal = FieldValue{false};
            } else {
                throw PropertyParseError("expected literal or `*var`", v.pos);
            }
            node->constraints.push_back(std::move(c));
            if (lex_.peek().kind == Tok::Comma) {
                lex_.take();
                continue;
            }
            expect(Tok::RBrace, "expected `}`");
            break;
        }
        return node;
    }

    void validate_bound_variables(const PropertyAst& ast) {
        std::set<std::string> bound(ast.variables.begin(), ast.variables.end());
        check_bound(ast.root, bound);
    }

    void check_bound(const PropertyNodePtr& node, const std::set<std::string>& bound) {
        if (!node) return;
        if (node->kind == PropertyNode::Kind::Atom) {
            for (const auto& c : node->constraints)
                if (c.variable && !bound.count(*c.variable))
                    throw PropertyParseError("unbound variable `*" + *c.variable + "`", 0);
        }
        check_bound(node->left, bound);
        check_bound(node->right, bound);
    }

    void assign_once_ids(PropertyAst& ast) {
        int next = 0;
        assign(const_cast<PropertyNode*>(ast.root.get()), next);
        ast.once_count = next;
    }

    void assign(PropertyNode* node, int& next) {
        if (!node) return;
        if (node->kind == PropertyNode::Kind::Once) node->once_id = next++;
        assign(const_cast<PropertyNode*>(node->left.get()), next);
        assign(const_cast<PropertyNode*>(node->right.get()), next);
    }

    Lexer lex_;
};

void render(const PropertyNodePtr& node, std::ostringstream& out) {
    using Kind = PropertyNode::Kind;
    switch (node->kind) {
        case Kind::Atom: {
            out << "{";
            bool first = true;
            for (const auto& c : node->constraints) {
                if (!first) out << ", ";
                first = false;
                out << c.key << ": ";
                if (c.variable) {
                    out << "*" << *c.variable;
                } else {
                    std::visit(
                        [&](const auto& v) {
                            using T = std::decay_t<decltype(v)>;
                            if constexpr (std::is_same_v<T, std::string>)
                                out << '"' << v << '"';
                            else if constexpr (std::is_same_v<T, bool>)
                                out << (v ? "True" : "False");
                            else
                                out << v;
                        },
                        *c.literal);
                }
            }
            out << "}";
            break;
        }
        case Kind::Not:
            out << "not ";
            render(node->left, out);
            break;
        case Kind::And:
            out << "(";
            render(node->left, out);
            out << " and ";
            render(node->right, out);
            out << ")";
            break;
        case Kind::Or:
            out << "(";
            render(node->left, out);
            out << " or ";
            render(node->right, out);
            out << ")";
            break;
        case Kind::Implies:
            out << "(";
            render(node->left, out);
            out << " -> ";
            render(node->right, out);
            out << ")";
            break;
        case Kind::Once:
            out << "once";
            if (node->once_lower != 0 || node->once_upper) {
                out << "[" << node->once_lower << ":";
                if (node->once_upper) out << *node->once_upper;
                out << "]";
            }
            out << "(";
            render(node->left, out);
            out << ")";
            break;
        case Kind::Forall:
            break;  // never appears below the prefix
    }
}

}  // namespace

PropertyAst parse_property(const std::string& text) {
    Parser parser(text);
    PropertyAst ast = parser.parse();
    ast.source = text;
    return ast;
}

std::string to_string(const PropertyAst& ast) {
    std::ostringstream out;
    for (const auto& v : ast.variables) out << "forall[" << v << "]. ";
    render(ast.root, out);
    return out.str();
}

std::vector<NamedProperty> parse_property_file(const std::string& text) {
    std::vector<NamedProperty> props;
    std::istringstream in(text);
    std::string line;
    NamedProperty current;
    auto flush = [&] {
        if (!current.id.empty() || !current.spec.empty()) {
            if (current.id.empty())
                throw std::runtime_error("property block missing `id:`");
            if (current.spec.empty())
                throw std::runtime_error("property `" + current.id + "` missing `spec:`");
            props.push_back(current);
            current = {};
        }
    };
    while (std::getline(in, line)) {
        std::string trimmed = line;
        while (!trimmed.empty() && std::isspace(static_cast<unsigned char>(trimmed.back())))
            trimmed.pop_back();
        std::size_t start = 0;
        while (start < trimmed.size() && std::isspace(static_cast<unsigned char>(trimmed[start])))
            ++start;
        trimmed = trimmed.substr(start);
        if (trimmed.empty()) {
            flush();
            continue;
        }
        if (trimmed[0] == '#') continue;
        if (trimmed.rfind("id:", 0) == 0) {
            if (!current.id.empty()) flush();
            current.id = trimmed.substr(3);
            current.id.erase(0, current.id.find_first_not_of(' '));
        } else if (trimmed.rfind("spec:", 0) == 0) {
            current.spec = trimmed.substr(5);
            current.spec.erase(0, current.spec.find_first_not_of(' '));
        } else {
            throw std::runtime_error("unexpected line in property file: " + trimmed);
        }
    }
    flush();
    return props;
}

}  // namespace rvbus
