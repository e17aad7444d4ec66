#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "multirag/client.hpp"
#include "multirag/homology.hpp"

namespace multirag {

// Empirical token distribution of one attribute value; keys are the
// lowercased tokens (numbers/dates kept whole), probabilities cover exactly
// the observed support and sum to 1.
struct TokenDistribution {
  std::map<std::string, double> probabilities;
};

// Sparse joint over (left token, right token). The marginals are the row
// and column sums of the joint — the entropy terms are taken from these,
// which keeps the joint self-consistent by construction.
struct JointDistribution {
  std::map<std::pair<std::string, std::string>, double> probabilities;
  TokenDistribution left;
  TokenDistribution right;
};

// symmetric_uncertainty: S = 2·I/(H1+H2), which reaches 1 for identical
// contents. mi_ratio: S = I/(H1+H2), capped at 0.5 analytically; kept as a
// switch for comparison runs.
enum class SimilarityMode { symmetric_uncertainty, mi_ratio };

std::string_view to_string(SimilarityMode mode);
SimilarityMode similarity_mode_from_string(std::string_view s);

struct ConfidenceConfig {
  double alpha = 0.5;           // authority blend: generation vs history
  double beta = 0.5;            // sigmoid steepness for generation scores
  double node_threshold = 0.7;  // keep a member iff C(v) exceeds this
  double graph_threshold = 0.5; // confident groups consult top_k members only
  std::size_t top_k = 2;
  SimilarityMode similarity_mode = SimilarityMode::symmetric_uncertainty;
};

// Add-one-smoothed distribution over the content's tokens.
TokenDistribution estimate_distribution(std::string_view content);

// Joint built as an overlap mixture: shared tokens contribute their
// min-probability mass on the diagonal, the remainder is distributed as the
// product of the marginals. Identical contents yield a diagonal joint
// (maximal dependence); token-disjoint contents yield an independent one.
JointDistribution estimate_joint(std::string_view a, std::string_view b);

// Natural-log entropy −Σ p·ln p.
double entropy(const TokenDistribution& d);

// Σ p(x,y)·ln(p(x,y)/(p(x)p(y))) over the joint; non-negative and bounded
// by the smaller marginal entropy.
double mutual_information(const JointDistribution& j);

// Normalized mutual-information similarity in [0,1]; symmetric. Zero-entropy
// degenerate cases: equal token multisets → 1, otherwise the Jaccard overlap
// of the token sets.
double similarity(std::string_view a, std::string_view b,
                  SimilarityMode mode = SimilarityMode::symmetric_uncertainty);

// Display text a member is scored on: the object literal, or the entity
// label for entity-valued objects.
std::string member_content(const KnowledgeGraph& g, TripleId id);
// "(subject, predicate, object)" rendering used in authority prompts/keys.
std::string triple_text(const KnowledgeGraph& g, TripleId id);
// Source a member is attributed to: its first provenance entry.
std::string member_source(const KnowledgeGraph& g, TripleId id);

// Mean pairwise similarity over ordered member pairs, in [0,1].
double graph_confidence(const HomologousSubgraph& sg, const KnowledgeGraph& g,
                        SimilarityMode mode);

// Mean similarity of a content against its peer set; 0 when there are none.
double node_consistency(std::string_view content,
                        std::span<const std::string> peers,
                        SimilarityMode mode);

struct QueryFeedback {
  double correct = 0;    // confirmed-correct members from the source
  double retrieved = 0;  // members retrieved from the source
};

// Per-source reliability: a pseudo-count weight and a prior in [0,1].
// Unknown sources answer with the configured defaults.
class SourceHistory {
 public:
  struct Entry {
    double weight = 50.0;
    double prior = 0.5;

    bool operator==(const Entry&) const = default;
  };

  explicit SourceHistory(double init_weight = 50.0, double default_prior = 0.5)
      : init_weight_(init_weight), default_prior_(default_prior) {}

  Entry get(std::string_view source) const;
  void set(std::string source, Entry entry);
  // Folds one batch of feedback into the source's entry:
  //   prior' = (weight·prior + correct)/(weight + retrieved)
  //   weight' = weight + retrieved
  // Sequential updates telescope to the same value as one merged batch.
  void update(std::string_view source, const QueryFeedback& feedback);

  const std::map<std::string, Entry, std::less<>>& entries() const {
    return entries_;
  }
  double init_weight() const { return init_weight_; }
  double default_prior() const { return default_prior_; }

  bool operator==(const SourceHistory&) const = default;

 private:
  double init_weight_;
  double default_prior_;
  std::map<std::string, Entry, std::less<>> entries_;
};

SourceHistory update_history(SourceHistory hist, std::string_view source,
                             const QueryFeedback& feedback);

// (weight·prior + correct)/(weight + retrieved) for the source's entry and
// the current query's feedback; the plain prior when there is no feedback.
double authority_hist(const SourceHistory& hist, std::string_view source,
                      const QueryFeedback& current);

// 1/(1+exp(−β·(raw − mean))): the raw generation score is centered on the
// consulted group's mean so β acts as a pure steepness knob.
double authority_llm(double raw_score, double mean_score,
                     const ConfidenceConfig& cfg);

// Fetches one raw score per member via the client; replies must carry a
// decimal in [−10,10] on the first line.
double raw_authority_score(const KnowledgeGraph& g, TripleId member,
                           std::string_view group_context,
                           GenerationClient& client);

// α·llm + (1−α)·hist.
double node_authority(double auth_llm, double auth_hist,
                      const ConfidenceConfig& cfg);

struct NodeConfidence {
  TripleId member = 0;
  double consistency = 0;  // S_n(v)
  double authority = 0;    // A(v)
  double total = 0;        // C(v) = S_n + A
  bool kept = false;
  std::string reason;  // non-empty when filtered
};

struct MccOptions {
  bool graph_gating = true;    // confident groups consult top_k members only
  bool node_filtering = true;  // apply the threshold verdict
  bool score_nodes = true;     // false: keep everything, make no client calls
  bool fail_soft = true;       // client failure filters the member instead of
                               // aborting the batch
};

struct MccGroupResult {
  std::string key;
  std::optional<double> graph_confidence;
  std::vector<NodeConfidence> scored;  // consulted members, member order
  std::vector<TripleId> unconsulted;   // outside the retrieval set
};

struct MccResult {
  std::vector<MccGroupResult> groups;  // input subgraph order
  std::vector<TripleId> kept;          // ascending
  std::vector<TripleId> filtered;      // scored but rejected, ascending
  std::uint64_t history_lookups = 0;   // source-history reads performed
};

// Two-level confidence pass: per group, compute the graph confidence and
// pick the consulted set (top_k by consistency when the group clears the
// gate, everyone otherwise); per consulted member, C(v) = S_n(v) + A(v) with
// the verdict C(v) > node_threshold. `client` may be null when alpha = 0 or
// scoring is disabled.
MccResult mcc(std::span<const HomologousSubgraph> subgraphs,
              const KnowledgeGraph& g, const ConfidenceConfig& cfg,
              GenerationClient* client, const SourceHistory& hist,
              const MccOptions& opts = {});

}  // namespace multirag
