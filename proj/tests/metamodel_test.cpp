#include <gtest/gtest.h>

#include <deque>
#include <random>
#include <set>

#include "grrw/metamodel.hpp"

using namespace grrw;

namespace {

// Reachability over explicit super lists, independent of Schema's masks.
bool bfs_reaches(const std::vector<std::vector<int>>& supers, int from, int to) {
  std::vector<bool> seen(supers.size(), false);
  std::deque<int> queue{from};
  seen[from] = true;
  while (!queue.empty()) {
    int c = queue.front();
    queue.pop_front();
    if (c == to) return true;
    for (int s : supers[c]) {
      if (!seen[s]) {
        seen[s] = true;
        queue.push_back(s);
      }
    }
  }
  return false;
}

std::string cls(int i) { return "C" + std::to_string(i); }

}  // namespace

TEST(Metamodel, AbstractClassWithoutAttributes) {
  Schema s;
  auto state = s.declare_node_class("State", {}, {}, true);
  EXPECT_TRUE(s.info(state).is_abstract);
  EXPECT_TRUE(s.info(state).attributes.empty());
  EXPECT_TRUE(s.slots(state).empty());
  EXPECT_TRUE(s.is_subtype_of(state, Schema::node_root()));
}

TEST(Metamodel, DirectSubtype) {
  Schema s;
  s.declare_node_class("State", {}, {}, true);
  s.declare_node_class("SynSent", {"State"});
  EXPECT_TRUE(s.is_subtype_of("SynSent", "State"));
  EXPECT_FALSE(s.is_subtype_of("State", "SynSent"));
  EXPECT_TRUE(s.is_subtype_of("SynSent", "SynSent"));
}

TEST(Metamodel, UnknownClassInSubtypeQuery) {
  Schema s;
  s.declare_node_class("A");
  EXPECT_THROW(s.is_subtype_of("A", "Missing"), SchemaError);
  EXPECT_THROW(s.is_subtype_of("Missing", "A"), SchemaError);
}

TEST(Metamodel, DiamondOverOneDeclarationHasOneSlot) {
  // Resolution table written by hand before the implementation:
  //   Base.name -> Base ; A.name -> Base ; B.name -> Base ; C.name -> Base
  //   C.a -> A ; C.b -> B ; C has 3 slots
  Schema s;
  auto base = s.declare_node_class("Base", {}, {{"name", ValueType::string()}});
  auto a = s.declare_node_class("A", {"Base"}, {{"a", ValueType::integer()}});
  auto b = s.declare_node_class("B", {"Base"}, {{"b", ValueType::boolean()}});
  auto c = s.declare_node_class("C", {"A", "B"});
  EXPECT_EQ(s.slots(c).size(), 3u);
  for (auto k : {base, a, b, c}) {
    EXPECT_EQ(&s.resolve_attribute(k, "name"), &s.info(base).attributes[0]);
  }
  EXPECT_EQ(&s.resolve_attribute(c, "a"), &s.info(a).attributes[0]);
  EXPECT_EQ(&s.resolve_attribute(c, "b"), &s.info(b).attributes[0]);
  EXPECT_EQ(s.resolve_attribute(c, "name").type, ValueType::string());
}

TEST(Metamodel, IndependentSameNameDeclarationsRejected) {
  Schema s;
  s.declare_node_class("A", {}, {{"name", ValueType::string()}});
  s.declare_node_class("B", {}, {{"name", ValueType::string()}});
  EXPECT_THROW(s.declare_node_class("C", {"A", "B"}), SchemaError);
}

TEST(Metamodel, LocalAttributeCollidingWithInherited) {
  Schema s;
  s.declare_node_class("A", {}, {{"x", ValueType::string()}});
  EXPECT_THROW(s.declare_node_class("B", {"A"}, {{"x", ValueType::integer()}}), SchemaError);
}

TEST(Metamodel, DeclarationErrors) {
  Schema s;
  s.declare_node_class("A");
  EXPECT_THROW(s.declare_node_class("A"), SchemaError);
  EXPECT_THROW(s.declare_node_class("B", {"Missing"}), SchemaError);
  EXPECT_THROW(s.declare_node_class("Self", {"Self"}), SchemaError);
  // Edge supertypes must be edge classes.
  EXPECT_THROW(s.declare_edge_class("E", {"A"}), SchemaError);
  // Node and edge namespaces are separate.
  EXPECT_NO_THROW(s.declare_edge_class("A"));
}

TEST(Metamodel, ResolveAttribute) {
  Schema s;
  auto klass = s.declare_node_class("Class", {}, {{"name", ValueType::string()}});
  EXPECT_EQ(s.resolve_attribute(klass, "name").type, ValueType::string());
  s.declare_node_class("Parent", {"Class"});
  auto child = s.declare_node_class("Child", {"Parent"});
  EXPECT_EQ(&s.resolve_attribute(child, "name"), &s.info(klass).attributes[0]);
  EXPECT_THROW(s.resolve_attribute(child, "missing"), SchemaError);
}

TEST(Metamodel, EnumValidation) {
  Schema s;
  s.declare_enum({"Flags", {{"SYN", 0}, {"ACK", 1}}});
  EXPECT_THROW(s.declare_enum({"Flags", {}}), SchemaError);
  EXPECT_THROW(s.declare_enum({"Dup", {{"A", 0}, {"A", 1}}}), SchemaError);
  EXPECT_THROW(s.declare_enum({"DupValue", {{"A", 0}, {"B", 0}}}), SchemaError);
  EXPECT_NO_THROW(s.declare_node_class("Seg", {}, {{"flag", ValueType::enumeration("Flags")}}));
  EXPECT_THROW(s.declare_node_class("Bad", {}, {{"f", ValueType::enumeration("Nope")}}),
               SchemaError);
}

TEST(Metamodel, RandomDagSubtypeMatchesBfs) {
  for (unsigned seed = 1; seed <= 20; ++seed) {
    std::mt19937 rng(seed);
    Schema s;
    const int n = 50;
    std::vector<std::vector<int>> supers(n);
    std::vector<ClassId> ids(n);
    for (int i = 0; i < n; ++i) {
      std::set<int> picks;
      if (i > 0) {
        int count = static_cast<int>(rng() % 4);
        for (int k = 0; k < count; ++k) picks.insert(static_cast<int>(rng() % i));
      }
      std::vector<std::string> names;
      for (int p : picks) {
        supers[i].push_back(p);
        names.push_back(cls(p));
      }
      ids[i] = s.declare_node_class(cls(i), names);
    }
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        ASSERT_EQ(s.is_subtype_of(ids[a], ids[b]), bfs_reaches(supers, a, b))
            << "seed " << seed << " " << a << " <: " << b;
      }
    }
    // Transitivity, checked directly.
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) {
        if (!s.is_subtype_of(ids[a], ids[b])) continue;
        for (int c = 0; c < n; ++c) {
          if (s.is_subtype_of(ids[b], ids[c])) {
            ASSERT_TRUE(s.is_subtype_of(ids[a], ids[c]));
          }
        }
      }
    }
  }
}

TEST(Metamodel, RandomCycleInjectionAlwaysRejected) {
  for (unsigned seed = 1; seed <= 100; ++seed) {
    std::mt19937 rng(seed);
    const int n = 2 + static_cast<int>(rng() % 20);
    std::vector<std::vector<int>> supers(n);
    for (int i = 1; i < n; ++i) {
      supers[i].push_back(static_cast<int>(rng() % i));
    }
    // Close a cycle: some ancestor of `low` gets `low`'s descendant as supertype.
    int high = 1 + static_cast<int>(rng() % (n - 1));
    int low = high;
    while (!supers[low].empty() && rng() % 2) low = supers[low][0];
    int top = low;
    while (!supers[top].empty()) top = supers[top][0];
    supers[top].push_back(high);
    ASSERT_TRUE(bfs_reaches(supers, top, high) && bfs_reaches(supers, high, top));

    std::string text;
    // Declaration order shuffled so forward references occur.
    std::vector<int> order(n);
    for (int i = 0; i < n; ++i) order[i] = i;
    std::shuffle(order.begin(), order.end(), rng);
    for (int i : order) {
      text += "node class " + cls(i);
      for (std::size_t k = 0; k < supers[i].size(); ++k) {
        text += (k ? ", " : " extends ") + cls(supers[i][k]);
      }
      text += ";\n";
    }
    EXPECT_THROW(parse_schema_text(text), SchemaError) << text;
  }
}

TEST(Metamodel, ResolveAttributeAgreesWithNaiveOracle) {
  for (unsigned seed = 1; seed <= 30; ++seed) {
    std::mt19937 rng(seed);
    const int n = 30;
    std::vector<std::vector<int>> supers(n);
    std::vector<std::vector<std::string>> own(n);
    Schema s;
    std::vector<ClassId> ids;
    for (int i = 0; i < n; ++i) {
      std::set<int> picks;
      if (i > 0) {
        int count = static_cast<int>(rng() % 3);
        for (int k = 0; k < count; ++k) picks.insert(static_cast<int>(rng() % i));
      }
      std::vector<std::string> names;
      for (int p : picks) {
        supers[i].push_back(p);
        names.push_back(cls(p));
      }
      std::vector<AttributeDecl> attrs;
      if (rng() % 3 == 0) {
        std::string a = std::string(1, static_cast<char>('a' + rng() % 4));
        attrs.push_back({a, ValueType::integer()});
        own[i].push_back(a);
      }
      try {
        ids.push_back(s.declare_node_class(cls(i), names, attrs));
      } catch (const SchemaError&) {
        // Rejected declarations are checked against the oracle too: some
        // attribute must be declared twice along the ancestry.
        std::map<std::string, std::set<int>> decls;
        for (int k = 0; k < i; ++k) {
          bool anc = false;
          for (int p : supers[i]) anc = anc || bfs_reaches(supers, p, k);
          if (!anc) continue;
          for (const auto& a : own[k]) decls[a].insert(k);
        }
        for (const auto& a : own[i]) decls[a].insert(i);
        bool ambiguous = false;
        for (const auto& [name, where] : decls) ambiguous = ambiguous || where.size() > 1;
        ASSERT_TRUE(ambiguous) << "seed " << seed << " class " << i;
        supers[i].clear();
        own[i].clear();
        ids.push_back(s.declare_node_class(cls(i)));
      }
    }
    for (int i = 0; i < n; ++i) {
      for (std::string a : {"a", "b", "c", "d"}) {
        std::set<int> where;
        for (int k = 0; k < n; ++k) {
          if (!bfs_reaches(supers, i, k)) continue;
          for (const auto& x : own[k]) {
            if (x == a) where.insert(k);
          }
        }
        if (where.empty()) {
          EXPECT_THROW(s.resolve_attribute(ids[i], a), SchemaError);
        } else {
          ASSERT_EQ(where.size(), 1u);
          EXPECT_EQ(&s.resolve_attribute(ids[i], a), &s.info(ids[*where.begin()]).attributes[0]);
        }
      }
    }
  }
}

TEST(SchemaText, ParsesAllDeclarationForms) {
  const char* text = R"(
    // comment
    package java uri "http://example.org/java" prefix java;
    enum Color { RED, GREEN = 5, BLUE }
    abstract node class Named { name : string; }
    node class Box extends Named {
      tags : set<string>;
      sizes : array<int>;
      index : map<string,double>;
      color : Color;
      ok : boolean;
    };
    edge class contains connect Box -> Named containment;
    edge class link;
  )";
  Schema s = parse_schema_text(text, "t.gm");
  const auto* color = s.find_enum("Color");
  ASSERT_NE(color, nullptr);
  EXPECT_EQ(color->value_of("GREEN"), 5);
  EXPECT_EQ(color->value_of("BLUE"), 6);
  auto box = s.node_class("Box");
  EXPECT_EQ(s.resolve_attribute(box, "tags").type, ValueType::set_of({ScalarKind::String, {}}));
  EXPECT_EQ(s.resolve_attribute(box, "index").type,
            ValueType::map_of({ScalarKind::String, {}}, {ScalarKind::Double, {}}));
  auto contains = s.edge_class("contains");
  EXPECT_TRUE(s.info(contains).containment);
  EXPECT_EQ(s.info(contains).source, box);
  EXPECT_TRUE(s.info(s.node_class("Named")).is_abstract);
  ASSERT_EQ(s.packages().size(), 1u);
  EXPECT_EQ(s.packages()[0].ns_uri, "http://example.org/java");
}

TEST(SchemaText, EmitParseIsIdentity) {
  Schema s;
  s.declare_enum({"E", {{"A", 0}, {"B", 3}}});
  s.declare_package({"p", "urn:p", "p"});
  s.declare_node_class("Base", {}, {{"name", ValueType::string()}}, true);
  s.declare_node_class("X", {"Base"}, {{"e", ValueType::enumeration("E")}});
  ClassDecl edge{"X_to", {}, {{"w", ValueType::floating()}}, false, true, "X", "Base"};
  s.declare_edge_class(edge);
  s.declare_node_class("Y", {"Base", "X"}, {{"m", ValueType::map_of({ScalarKind::Integer, {}}, {ScalarKind::String, {}})}});
  s.declare_edge_class("link");
  const auto text = emit_schema_text(s);
  Schema back = parse_schema_text(text);
  EXPECT_TRUE(back == s) << text;
  EXPECT_EQ(emit_schema_text(back), text);
}

TEST(SchemaText, SyntaxErrorHasPosition) {
  try {
    parse_schema_text("node class A;\nnode klass B;", "bad.gm");
    FAIL();
  } catch (const ParseError& e) {
    EXPECT_EQ(e.line(), 2u);
    EXPECT_EQ(std::string(e.what()).rfind("bad.gm:2:", 0), 0u) << e.what();
  }
}
