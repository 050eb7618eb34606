#include <doctest.h>

#include "rvbus/property.hpp"
#include "rvbus/scenario.hpp"

using namespace rvbus;

TEST_CASE("property 3a parses to the expected shape") {
    auto props = case_study_properties();
    const auto& p3a = props[4];
    REQUIRE(p3a.id == "3a");
    PropertyAst ast = parse_property(p3a.spec);
    REQUIRE(ast.variables == std::vector<std::string>{"i"});
    REQUIRE(ast.root->kind == PropertyNode::Kind::Implies);
    const auto& antecedent = *ast.root->left;
    REQUIRE(antecedent.kind == PropertyNode::Kind::Atom);
    REQUIRE(antecedent.constraints.size() == 3);
    CHECK(antecedent.constraints[0].key == "service");
    CHECK(std::get<std::string>(*antecedent.constraints[0].literal) == "/SetLED");
    CHECK(antecedent.constraints[1].key == "response");
    CHECK(std::get<bool>(*antecedent.constraints[1].literal) == true);
    CHECK(antecedent.constraints[2].key == "res_id");
    CHECK(*antecedent.constraints[2].variable == "i");
    const auto& consequent = *ast.root->right;
    REQUIRE(consequent.kind == PropertyNode::Kind::Once);
    CHECK(consequent.once_lower == 0);
    CHECK_FALSE(consequent.once_upper.has_value());
    CHECK(consequent.left->kind == PropertyNode::Kind::Atom);
}

TEST_CASE("property 1a flattens to a two-variable forall") {
    auto ast = parse_property(case_study_properties()[0].spec);
    CHECK(ast.variables == std::vector<std::string>{"i", "s"});
    CHECK(ast.once_count == 2);
}

TEST_CASE("all six case-study properties parse") {
    for (const auto& p : case_study_properties()) CHECK_NOTHROW(parse_property(p.spec));
    CHECK(case_study_properties().size() == 6);
}

TEST_CASE("once bounds") {
    auto ast = parse_property("once[100:]({a: 1})");
    REQUIRE(ast.root->kind == PropertyNode::Kind::Once);
    CHECK(ast.root->once_lower == 100);
    CHECK_FALSE(ast.root->once_upper.has_value());

    ast = parse_property("once[2:5]({a: 1})");
    CHECK(ast.root->once_lower == 2);
    CHECK(ast.root->once_upper == 5);

    // Reelay style without parentheses around the atom.
    ast = parse_property("once[1:]{a: 1}");
    CHECK(ast.root->once_lower == 1);

    CHECK_THROWS_AS(parse_property("once[5:2]({a: 1})"), PropertyParseError);
}

TEST_CASE("unbound variables are rejected") {
    CHECK_THROWS_WITH_AS(parse_property("{a: *x}"), doctest::Contains("unbound"),
                         PropertyParseError);
    CHECK_THROWS_AS(parse_property("forall[i]. {a: *x}"), PropertyParseError);
}

TEST_CASE("syntax errors carry positions") {
    try {
        parse_property("forall[i]. {a: }");
        FAIL("expected error");
    } catch (const PropertyParseError& ex) {
        CHECK(ex.position > 0);
    }
    CHECK_THROWS_AS(parse_property("once({a: 1}) extra"), PropertyParseError);
    CHECK_THROWS_AS(parse_property("forall[i]. once(forall[j]. {a: *j})"), PropertyParseError);
}

TEST_CASE("precedence: not > and > or > ->") {
    // a -> b or c and not d ≡ a -> (b or (c and (not d)))
    auto ast = parse_property("{a: 1} -> {b: 1} or {c: 1} and not {d: 1}");
    REQUIRE(ast.root->kind == PropertyNode::Kind::Implies);
    REQUIRE(ast.root->right->kind == PropertyNode::Kind::Or);
    REQUIRE(ast.root->right->right->kind == PropertyNode::Kind::And);
    CHECK(ast.root->right->right->right->kind == PropertyNode::Kind::Not);
}

TEST_CASE("rendering re-parses to the same structure") {
    for (const auto& p : case_study_properties()) {
        PropertyAst ast = parse_property(p.spec);
        PropertyAst again = parse_property(to_string(ast));
        CHECK(to_string(again) == to_string(ast));
    }
}

TEST_CASE("property files parse into id/spec pairs") {
    auto props = parse_property_file(
        "# comment\nid: p1\nspec: {a: 1}\n\nid: p2\nspec: not {b: 2}\n");
    REQUIRE(props.size() == 2);
    CHECK(props[0].id == "p1");
    CHECK(props[1].spec == "not {b: 2}");
    CHECK_THROWS(parse_property_file("spec: {a: 1}\n"));
}
