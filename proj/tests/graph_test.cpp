#include <gtest/gtest.h>

#include <sstream>

#include "csts/error.hpp"
#include "csts/graph.hpp"
#include "csts/graph_io.hpp"
#include "support.hpp"

namespace csts {
namespace {

using testing::make_edge;
using testing::make_entity;

ErrorCode code_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorCode::ParseError;
}

TEST(Entity, ValidHostPasses) {
  EXPECT_TRUE(validate_entity(make_entity("h:ws01", EntityType::Host), default_attribute_schema()).ok());
}

TEST(Entity, InvertedValidityReported) {
  auto e = make_entity("host:a", EntityType::Host, 100, 50);
  EXPECT_TRUE(validate_entity(e, default_attribute_schema()).has("inverted validity interval"));
}

TEST(Entity, AttributeKindMismatchReported) {
  auto e = make_entity("user:a", EntityType::User);
  e.attributes["logon_count"] = std::string("abc");
  EXPECT_TRUE(validate_entity(e, default_attribute_schema()).has("type mismatch"));
}

TEST(Entity, MissingProvenanceAndUnknownAttribute) {
  auto e = make_entity("user:a", EntityType::User);
  e.source_meta.clear();
  e.attributes["shoe_size"] = std::int64_t{42};
  const auto v = validate_entity(e, default_attribute_schema());
  EXPECT_TRUE(v.has("missing provenance"));
  EXPECT_TRUE(v.has("unknown attribute"));
}

class Insert : public ::testing::Test {
 protected:
  void SetUp() override {
    GraphDelta d;
    d.entity_upserts = {make_entity("user:u1", EntityType::User),
                        make_entity("host:h1", EntityType::Host),
                        make_entity("process:p1", EntityType::Process),
                        make_entity("user:short", EntityType::User, 0, 100),
                        make_entity("host:late", EntityType::Host, 60, 100)};
    g.apply(d);
  }
  SubstrateGraph g;
};

TEST_F(Insert, AuthenticationInsideValidityAccepted) {
  insert_edge(g, make_edge("user:u1", "host:h1", RelationshipType::AuthenticatesTo, 50));
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST_F(Insert, EdgeOutsideValidityIntersection) {
  EXPECT_EQ(code_of([&] {
              insert_edge(g, make_edge("user:short", "host:late", RelationshipType::AuthenticatesTo, 50));
            }),
            ErrorCode::TemporalMisalignment);
}

TEST_F(Insert, ProcessCannotAuthenticate) {
  EXPECT_EQ(code_of([&] {
              insert_edge(g, make_edge("process:p1", "host:h1", RelationshipType::AuthenticatesTo, 50));
            }),
            ErrorCode::SignatureViolation);
}

TEST_F(Insert, UnknownEndpoint) {
  EXPECT_EQ(code_of([&] {
              insert_edge(g, make_edge("user:u1", "host:nope", RelationshipType::AuthenticatesTo, 50));
            }),
            ErrorCode::UnknownEntity);
}

TEST_F(Insert, EmptyDeltaOnlyGrowsLog) {
  const auto before = g;
  GraphDelta empty;
  empty.at = 10;
  g.apply(empty);
  EXPECT_EQ(g.entities(), before.entities());
  EXPECT_EQ(g.edges(), before.edges());
  EXPECT_EQ(g.delta_log().size(), before.delta_log().size() + 1);
}

TEST_F(Insert, TwoEntitiesOneEdge) {
  GraphDelta d;
  d.at = 5;
  d.entity_upserts = {make_entity("user:u2", EntityType::User), make_entity("host:h2", EntityType::Host)};
  d.edge_inserts = {make_edge("user:u2", "host:h2", RelationshipType::AuthenticatesTo, 5)};
  const auto v = g.entities().size();
  g.apply(d);
  EXPECT_EQ(g.entities().size(), v + 2);
  EXPECT_EQ(g.edges().size(), 1u);
}

TEST_F(Insert, OneBadEdgeRejectsWholeDelta) {
  GraphDelta d;
  d.at = 5;
  for (int i = 0; i < 5; ++i) {
    d.edge_inserts.push_back(make_edge("user:u1", "host:h1", RelationshipType::AuthenticatesTo, 5));
  }
  d.edge_inserts.insert(d.edge_inserts.begin() + 2,
                        make_edge("process:p1", "host:h1", RelationshipType::AuthenticatesTo, 5));
  const auto before = g;
  EXPECT_EQ(code_of([&] { g.apply(d); }), ErrorCode::SignatureViolation);
  EXPECT_TRUE(g == before);
}

TEST_F(Insert, OutOfOrderDeltaRejected) {
  GraphDelta d;
  d.at = 100;
  g.apply(d);
  d.at = 99;
  EXPECT_EQ(code_of([&] { g.apply(d); }), ErrorCode::OutOfOrderDelta);
}

TEST(Lifecycle, ForwardChainOnly) {
  auto e = make_entity("host:a", EntityType::Host);
  transition_lifecycle(e, LifecycleState::Active, 1);
  EXPECT_EQ(e.lifecycle.state, LifecycleState::Active);
  EXPECT_EQ(code_of([&] { transition_lifecycle(e, LifecycleState::Created, 2); }),
            ErrorCode::IllegalTransition);
  auto f = make_entity("host:b", EntityType::Host);
  EXPECT_EQ(code_of([&] { transition_lifecycle(f, LifecycleState::Dormant, 2); }),
            ErrorCode::IllegalTransition);
  transition_lifecycle(e, LifecycleState::Dormant, 5);
  EXPECT_EQ(code_of([&] { transition_lifecycle(e, LifecycleState::Retired, 4); }),
            ErrorCode::StaleTimestamp);
}

TEST(Snapshot, BeforeFirstAndAfterLast) {
  std::mt19937_64 rng(3);
  const auto g = testing::random_graph(rng, 6, 10);
  EXPECT_TRUE(snapshot_at(g, -1).entities().empty());
  EXPECT_TRUE(snapshot_at(g, 1'000'000) == g);
}

TEST(Neighborhood, StarAndTruncation) {
  GraphDelta d;
  d.entity_upserts = {make_entity("user:u", EntityType::User), make_entity("host:h1", EntityType::Host),
                      make_entity("host:h2", EntityType::Host), make_entity("host:h3", EntityType::Host)};
  for (auto h : {"host:h3", "host:h1", "host:h2"}) {
    d.edge_inserts.push_back(make_edge("user:u", h, RelationshipType::AuthenticatesTo, 10));
  }
  SubstrateGraph g;
  g.apply(d);
  const Interval all{0, std::nullopt};
  const auto full = neighborhood(g, "user:u", 1, all, {}, 32);
  EXPECT_EQ(full.nodes.size(), 4u);
  EXPECT_EQ(full.edges.size(), 3u);
  const auto two = neighborhood(g, "user:u", 1, all, {}, 2);
  EXPECT_EQ(two.nodes, (std::vector<std::string>{"host:h1", "user:u"}));
  EXPECT_EQ(code_of([&] { neighborhood(g, "user:zz", 1, all, {}, 2); }), ErrorCode::UnknownEntity);
}

TEST(Neighborhood, TypeFilterStopsTraversal) {
  GraphDelta d;
  d.entity_upserts = {make_entity("user:u", EntityType::User), make_entity("host:h1", EntityType::Host),
                      make_entity("process:p1", EntityType::Process)};
  d.edge_inserts = {make_edge("user:u", "host:h1", RelationshipType::AuthenticatesTo, 10),
                    make_edge("host:h1", "process:p1", RelationshipType::Executes, 11)};
  SubstrateGraph g;
  g.apply(d);
  const auto s = neighborhood(g, "user:u", 2, {0, std::nullopt}, {RelationshipType::AuthenticatesTo}, 32);
  EXPECT_EQ(s.nodes, (std::vector<std::string>{"host:h1", "user:u"}));
  EXPECT_EQ(s.edges, (std::vector<std::size_t>{0}));
}

TEST(DeltaLog, JsonlRoundTrip) {
  std::mt19937_64 rng(11);
  const auto g = testing::random_graph(rng, 10, 25);
  std::stringstream ss;
  write_delta_log(ss, g);
  EXPECT_EQ(read_delta_log(ss), g.delta_log());
}

// Randomized invariants (a larger budget runs in the acceptance binary).
TEST(SubstrateProperties, ReplayDeterminism) {
  auto r = testing::check_replay_determinism(101, 300);
  EXPECT_TRUE(r.pass) << r.detail;
}
TEST(SubstrateProperties, SignatureSoundness) {
  auto r = testing::check_signature_soundness(102, 500);
  EXPECT_TRUE(r.pass) << r.detail;
}
TEST(SubstrateProperties, TemporalContainment) {
  auto r = testing::check_temporal_containment(103, 500);
  EXPECT_TRUE(r.pass) << r.detail;
}
TEST(SubstrateProperties, LifecycleMonotonicity) {
  auto r = testing::check_lifecycle_monotonicity(104, 500);
  EXPECT_TRUE(r.pass) << r.detail;
}
TEST(SubstrateProperties, ParallelEdgesPreserved) {
  auto r = testing::check_parallel_edges(105, 500);
  EXPECT_TRUE(r.pass) << r.detail;
}
TEST(SubstrateProperties, MergeConservation) {
  auto r = testing::check_merge_conservation(106, 300);
  EXPECT_TRUE(r.pass) << r.detail;
}

}  // namespace
}  // namespace csts
