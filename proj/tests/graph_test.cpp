#include <gtest/gtest.h>

#include <random>

#include "grrw/graph.hpp"

using namespace grrw;

namespace {

std::shared_ptr<const Schema> case_schema() {
  return std::make_shared<Schema>(parse_schema_text(R"(
    enum Flag { SYN, ACK }
    abstract node class State { name : string; }
    node class SynSent extends State;
    node class Listen extends State;
    node class StateMachine;
    node class Class { name : string; flag : Flag; tags : set<string>; }
    edge class Class_extends;
    edge class link;
  )"));
}

}  // namespace

TEST(Graph, AddNodeCounts) {
  Graph g(case_schema());
  g.add_node("StateMachine");
  EXPECT_EQ(g.node_count(), 1u);
  EXPECT_EQ(g.edge_count(), 0u);
}

TEST(Graph, AbstractClassCannotBeInstantiated) {
  Graph g(case_schema());
  EXPECT_THROW(g.add_node("State"), GraphError);
  EXPECT_THROW(g.add_node("Missing"), SchemaError);
}

TEST(Graph, LinkEdgeOutDegree) {
  Graph g(case_schema());
  auto state = g.add_node("SynSent");
  auto klass = g.add_node("Class");
  g.add_edge("link", state, klass);
  EXPECT_EQ(g.outgoing(state, g.schema().edge_class("link")).size(), 1u);
  EXPECT_EQ(g.incoming(klass).size(), 1u);
}

TEST(Graph, ParallelEdgesAreKept) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  auto b = g.add_node("Class");
  auto e1 = g.add_edge("Class_extends", a, b);
  auto e2 = g.add_edge("Class_extends", a, b);
  EXPECT_NE(e1, e2);
  EXPECT_EQ(g.edge_count(), 2u);
  EXPECT_EQ(g.outgoing(a).size(), 2u);
}

TEST(Graph, DanglingEndpointRejected) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  auto b = g.add_node("Class");
  g.remove_node(b);
  EXPECT_THROW(g.add_edge("link", a, b), DanglingRefError);
}

TEST(Graph, RemoveNodeCascadesToIncidentEdges) {
  Graph g(case_schema());
  auto hub = g.add_node("Class");
  auto a = g.add_node("Class");
  auto b = g.add_node("Class");
  g.add_edge("link", hub, a);
  g.add_edge("link", b, hub);
  g.add_edge("link", hub, hub);
  auto keep = g.add_edge("link", a, b);
  ASSERT_EQ(g.edge_count(), 4u);
  g.remove_node(hub);
  EXPECT_EQ(g.node_count(), 2u);
  EXPECT_EQ(g.edge_count(), 1u);
  EXPECT_TRUE(g.contains(keep));
  EXPECT_EQ(g.outgoing(a).size(), 1u);
  EXPECT_EQ(g.incoming(b).size(), 1u);
}

TEST(Graph, RemoveIsolatedNode) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  g.add_node("Class");
  g.remove_node(a);
  EXPECT_EQ(g.node_count(), 1u);
}

TEST(Graph, AccessAfterDeleteIsAnError) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  g.remove_node(a);
  EXPECT_THROW(g.get_attr(a, "name"), DanglingRefError);
  EXPECT_THROW(g.remove_node(a), DanglingRefError);
  EXPECT_FALSE(g.contains(a));
}

TEST(Graph, IdsAreNeverReused) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  g.remove_node(a);
  auto b = g.add_node("Class");
  EXPECT_GT(b.id, a.id);
}

TEST(Graph, Attributes) {
  Graph g(case_schema());
  auto s = g.add_node("SynSent");
  EXPECT_EQ(std::get<std::string>(g.get_attr(s, "name")), "");
  g.set_attr(s, "name", std::string("SynSent"));
  EXPECT_EQ(std::get<std::string>(g.get_attr(s, "name")), "SynSent");
  EXPECT_THROW(g.get_attr(s, "nope"), GraphError);
  EXPECT_THROW(g.set_attr(s, "name", std::int64_t{3}), TypeMismatchError);

  auto c = g.add_node("Class");
  EXPECT_EQ(std::get<EnumValue>(g.get_attr(c, "flag")).value, 0);
  g.set_attr(c, "flag", EnumValue{"Flag", 1});
  EXPECT_THROW(g.set_attr(c, "flag", EnumValue{"Flag", 7}), TypeMismatchError);
  EXPECT_THROW(g.set_attr(c, "flag", EnumValue{"Other", 0}), TypeMismatchError);
  g.set_attr(c, "tags", SetValue{std::string("x"), std::string("y")});
  EXPECT_EQ(std::get<SetValue>(g.get_attr(c, "tags")).size(), 2u);
  EXPECT_THROW(g.set_attr(c, "tags", SetValue{std::int64_t{1}}), TypeMismatchError);
}

TEST(Graph, SubtypeIteration) {
  Graph g(case_schema());
  EXPECT_TRUE(g.nodes_of_type(g.schema().node_class("State")).empty());
  auto a = g.add_node("SynSent");
  g.add_node("Class");
  auto b = g.add_node("Listen");
  auto state = g.schema().node_class("State");
  EXPECT_EQ(g.nodes_of_type(state, true), (std::vector<ElemId>{a.id, b.id}));
  EXPECT_TRUE(g.nodes_of_type(state, false).empty());
}

TEST(Graph, NameIndexIsBijective) {
  Graph g(case_schema());
  auto a = g.add_node("Class");
  auto b = g.add_node("Class");
  g.set_name(a, "a");
  EXPECT_THROW(g.set_name(b, "a"), GraphError);
  g.set_name(a, "renamed");
  EXPECT_FALSE(g.find_by_name("a"));
  EXPECT_EQ(g.find_by_name("renamed"), a.id);
  g.remove_node(a);
  EXPECT_FALSE(g.find_by_name("renamed"));
}

namespace {

// Full-graph consistency sweep used after random operation sequences.
void check_consistent(const Graph& g) {
  std::size_t out_total = 0;
  for (ElemId n : g.nodes()) {
    for (ElemId e : g.outgoing(NodeRef{{n}})) {
      ASSERT_TRUE(g.is_live(e));
      ASSERT_EQ(g.source(EdgeRef{{e}}).id, n);
      ++out_total;
    }
    for (ElemId e : g.incoming(NodeRef{{n}})) {
      ASSERT_TRUE(g.is_live(e));
      ASSERT_EQ(g.target(EdgeRef{{e}}).id, n);
    }
  }
  for (ElemId e : g.edges()) {
    ASSERT_TRUE(g.is_live(g.source(EdgeRef{{e}}).id));
    ASSERT_TRUE(g.is_live(g.target(EdgeRef{{e}}).id));
  }
  ASSERT_EQ(out_total, g.edge_count());
  ASSERT_EQ(g.nodes().size(), g.node_count());
}

}  // namespace

TEST(Graph, RandomOperationSequencesStayConsistent) {
  auto schema = case_schema();
  const ClassId concrete[] = {schema->node_class("SynSent"), schema->node_class("Listen"),
                              schema->node_class("Class"), schema->node_class("StateMachine")};
  for (unsigned seed = 1; seed <= 50; ++seed) {
    std::mt19937 rng(seed);
    Graph g(schema);
    Graph twin(schema);
    std::size_t created = 0, deleted = 0;
    for (int step = 0; step < 300; ++step) {
      auto nodes = g.nodes();
      auto edges = g.edges();
      int op = static_cast<int>(rng() % 10);
      if (op < 4 || nodes.size() < 2) {
        ClassId c = concrete[rng() % 4];
        g.add_node(c);
        twin.add_node(c);
        ++created;
      } else if (op < 7) {
        NodeRef a{{nodes[rng() % nodes.size()]}}, b{{nodes[rng() % nodes.size()]}};
        g.add_edge("link", a, b);
        twin.add_edge("link", a, b);
      } else if (op < 9) {
        NodeRef victim{{nodes[rng() % nodes.size()]}};
        g.remove_node(victim);
        twin.remove_node(victim);
        ++deleted;
      } else if (!edges.empty()) {
        EdgeRef victim{{edges[rng() % edges.size()]}};
        g.remove_edge(victim);
        twin.remove_edge(victim);
      }
      ASSERT_NO_FATAL_FAILURE(check_consistent(g));
    }
    EXPECT_EQ(g.node_count(), created - deleted);
    EXPECT_EQ(g.nodes(), twin.nodes());
    EXPECT_EQ(g.edges(), twin.edges());

    // nodes_of_type agrees with a filter over all nodes.
    for (ClassId c = 0; c < schema->class_count(); ++c) {
      if (schema->info(c).kind != ElementKind::Node) continue;
      std::vector<ElemId> expected;
      for (ElemId n : g.nodes()) {
        if (schema->is_subtype_of(g.class_of(n), c)) expected.push_back(n);
      }
      EXPECT_EQ(g.nodes_of_type(c, true), expected);
    }
  }
}
