// Fixtures, independent oracles and randomized property checks shared by the
// unit tests and the acceptance binary.
#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "csts/graph.hpp"
#include "csts/learning_objects.hpp"

namespace csts::testing {

/// Fresh empty directory under the system temp dir.
std::string scratch_dir(const std::string& name);

struct PropertyOutcome {
  bool pass = true;
  long cases = 0;
  std::string detail;  // first counterexample

  void fail(const std::string& why) {
    if (pass) detail = why;
    pass = false;
  }
};

CanonicalEntity make_entity(const std::string& id, EntityType type, Timestamp from = 0,
                            std::optional<Timestamp> to = std::nullopt);
CanonicalRelationship make_edge(const std::string& src, const std::string& dst,
                                RelationshipType type, Timestamp t, double confidence = 1.0,
                                const std::string& source = "fixture");

/// A random valid delta sequence over a small typed universe; every edge is
/// signature-admitted and inside its endpoints' validity.
std::vector<GraphDelta> random_deltas(std::mt19937_64& rng, int n_entities, int n_edges,
                                      Timestamp horizon = 10'000);
SubstrateGraph random_graph(std::mt19937_64& rng, int n_entities, int n_edges,
                            Timestamp horizon = 10'000);

// Brute-force references.
double brute_auroc(const std::vector<double>& s, const std::vector<int>& y);
std::pair<double, double> brute_best_f1(const std::vector<double>& s, const std::vector<int>& y);

// Property suites; `cases` counts checked instances.
PropertyOutcome check_metric_oracles(std::uint64_t seed, int instances = 1000);
PropertyOutcome check_bootstrap_determinism(std::uint64_t seed);

PropertyOutcome check_replay_determinism(std::uint64_t seed, int cases);
PropertyOutcome check_signature_soundness(std::uint64_t seed, int cases);
PropertyOutcome check_temporal_containment(std::uint64_t seed, int cases);
PropertyOutcome check_lifecycle_monotonicity(std::uint64_t seed, int cases);
PropertyOutcome check_parallel_edges(std::uint64_t seed, int cases);
PropertyOutcome check_merge_conservation(std::uint64_t seed, int cases);

PropertyOutcome check_construct_containment(std::uint64_t seed, int cases);
PropertyOutcome check_motif_bruteforce(std::uint64_t seed, int cases);

/// Fixture graph and original object used by the view-validity fixtures.
struct ViewFixture {
  SubstrateGraph graph;
  LearningObject original;
};
ViewFixture view_fixture();

/// One candidate per validity constraint, each breaking only that constraint.
std::vector<std::pair<std::string, LearningObject>> single_violation_candidates(
    const ViewFixture& f);
PropertyOutcome check_view_constraints();

/// 20 objects; indices 0 and 1 are the planted look-alike pair.
std::vector<LearningObject> hard_negative_fixture();
PropertyOutcome check_hard_negative_recovery();

PropertyOutcome check_split_guard();
PropertyOutcome check_threshold_independence(std::uint64_t seed, int cases);

}  // namespace csts::testing
