#include "multirag/confidence.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <numeric>
#include <set>

#include "multirag/prompt.hpp"

namespace multirag {

namespace {

constexpr double kZeroEntropy = 1e-12;

std::vector<std::string> token_texts(std::string_view content) {
  std::vector<std::string> out;
  for (auto& tok : tokenize(content)) out.push_back(std::move(tok.text));
  return out;
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

TokenDistribution distribution_from_tokens(
    const std::vector<std::string>& tokens) {
  std::map<std::string, double> counts;
  for (const auto& t : tokens) counts[t] += 1.0;
  const double denom =
      static_cast<double>(tokens.size()) + static_cast<double>(counts.size());
  TokenDistribution d;
  for (auto& [token, count] : counts)
    d.probabilities.emplace(token, (count + 1.0) / denom);
  return d;
}

}  // namespace

std::string_view to_string(SimilarityMode mode) {
  return mode == SimilarityMode::symmetric_uncertainty ? "symmetric_uncertainty"
                                                       : "mi_ratio";
}

SimilarityMode similarity_mode_from_string(std::string_view s) {
  if (s == "symmetric_uncertainty")
    return SimilarityMode::symmetric_uncertainty;
  if (s == "mi_ratio") return SimilarityMode::mi_ratio;
  raise(Errc::config_error, "unknown similarity mode: " + std::string(s));
}

TokenDistribution estimate_distribution(std::string_view content) {
  auto tokens = token_texts(content);
  if (tokens.empty())
    raise(Errc::empty_content,
          "no tokens in content: '" + std::string(content) + "'");
  return distribution_from_tokens(tokens);
}

JointDistribution estimate_joint(std::string_view a, std::string_view b) {
  TokenDistribution pa = estimate_distribution(a);
  TokenDistribution pb = estimate_distribution(b);

  // Overlap mass: how much probability the two distributions agree on.
  double lambda = 0.0;
  for (const auto& [token, p] : pa.probabilities) {
    auto it = pb.probabilities.find(token);
    if (it != pb.probabilities.end()) lambda += std::min(p, it->second);
  }

  JointDistribution j;
  const double residual = 1.0 - lambda;
  if (residual > 0.0) {
    for (const auto& [x, px] : pa.probabilities)
      for (const auto& [y, py] : pb.probabilities)
        j.probabilities[{x, y}] = residual * px * py;
  }
  for (const auto& [token, p] : pa.probabilities) {
    auto it = pb.probabilities.find(token);
    if (it != pb.probabilities.end())
      j.probabilities[{token, token}] += std::min(p, it->second);
  }

  for (const auto& [pair, p] : j.probabilities) {
    j.left.probabilities[pair.first] += p;
    j.right.probabilities[pair.second] += p;
  }
  return j;
}

double entropy(const TokenDistribution& d) {
  double h = 0.0;
  for (const auto& [token, p] : d.probabilities)
    if (p > 0.0) h -= p * std::log(p);
  return std::max(0.0, h);
}

double mutual_information(const JointDistribution& j) {
  double info = 0.0;
  for (const auto& [pair, p] : j.probabilities) {
    if (p <= 0.0) continue;
    const double px = j.left.probabilities.at(pair.first);
    const double py = j.right.probabilities.at(pair.second);
    info += p * std::log(p / (px * py));
  }
  return std::max(0.0, info);
}

double similarity(std::string_view a, std::string_view b,
                  SimilarityMode mode) {
  auto ta = token_texts(a);
  auto tb = token_texts(b);
  if (ta.empty())
    raise(Errc::empty_content, "no tokens in content: '" + std::string(a) + "'");
  if (tb.empty())
    raise(Errc::empty_content, "no tokens in content: '" + std::string(b) + "'");

  JointDistribution j = estimate_joint(a, b);
  const double h1 = entropy(j.left);
  const double h2 = entropy(j.right);

  if (std::min(h1, h2) <= kZeroEntropy) {
    // A point-mass side carries no information; fall back to token overlap.
    auto sa = ta, sb = tb;
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());
    if (sa == sb) return 1.0;
    std::set<std::string> da(sa.begin(), sa.end()), db(sb.begin(), sb.end());
    std::vector<std::string> shared;
    std::set_intersection(da.begin(), da.end(), db.begin(), db.end(),
                          std::back_inserter(shared));
    const double unions = static_cast<double>(da.size() + db.size() - shared.size());
    return unions == 0.0 ? 0.0 : static_cast<double>(shared.size()) / unions;
  }

  const double scale = mode == SimilarityMode::symmetric_uncertainty ? 2.0 : 1.0;
  return clamp01(scale * mutual_information(j) / (h1 + h2));
}

std::string member_content(const KnowledgeGraph& g, TripleId id) {
  const Triple& tr = g.triple(id);
  if (!tr.object.is_entity()) return tr.object.value;
  const Entity* ent = g.find_entity(tr.object.value);
  return ent ? ent->label : tr.object.value;
}

std::string triple_text(const KnowledgeGraph& g, TripleId id) {
  const Triple& tr = g.triple(id);
  return "(" + tr.subject + ", " + tr.predicate + ", " +
         member_content(g, id) + ")";
}

std::string member_source(const KnowledgeGraph& g, TripleId id) {
  const Triple& tr = g.triple(id);
  return tr.provenance.empty() ? std::string{} : tr.provenance.front().source_id;
}

double graph_confidence(const HomologousSubgraph& sg, const KnowledgeGraph& g,
                        SimilarityMode mode) {
  const std::size_t n = sg.members.size();
  if (n < 2)
    raise(Errc::too_few_members,
          "graph confidence needs >= 2 members, got " + std::to_string(n) +
              " in " + sg.key());
  std::vector<std::string> contents;
  contents.reserve(n);
  for (TripleId m : sg.members) contents.push_back(member_content(g, m));

  // Ordered-pair average; similarity is symmetric so each unordered pair
  // contributes twice.
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = i + 1; k < n; ++k)
      total += 2.0 * similarity(contents[i], contents[k], mode);
  return clamp01(total / (static_cast<double>(n) * n - n));
}

double node_consistency(std::string_view content,
                        std::span<const std::string> peers,
                        SimilarityMode mode) {
  if (peers.empty()) return 0.0;
  double total = 0.0;
  for (const auto& peer : peers) total += similarity(content, peer, mode);
  return clamp01(total / static_cast<double>(peers.size()));
}

SourceHistory::Entry SourceHistory::get(std::string_view source) const {
  auto it = entries_.find(source);
  if (it != entries_.end()) return it->second;
  return Entry{init_weight_, default_prior_};
}

void SourceHistory::set(std::string source, Entry entry) {
  entries_.insert_or_assign(std::move(source), entry);
}

void SourceHistory::update(std::string_view source,
                           const QueryFeedback& feedback) {
  Entry entry = get(source);
  const double denom = entry.weight + feedback.retrieved;
  if (denom > 0.0)
    entry.prior = (entry.weight * entry.prior + feedback.correct) / denom;
  entry.weight = denom;
  entries_.insert_or_assign(std::string(source), entry);
}

SourceHistory update_history(SourceHistory hist, std::string_view source,
                             const QueryFeedback& feedback) {
  hist.update(source, feedback);
  return hist;
}

double authority_hist(const SourceHistory& hist, std::string_view source,
                      const QueryFeedback& current) {
  const SourceHistory::Entry entry = hist.get(source);
  const double denom = entry.weight + current.retrieved;
  if (denom <= 0.0) return entry.prior;
  return clamp01((entry.weight * entry.prior + current.correct) / denom);
}

double authority_llm(double raw_score, double mean_score,
                     const ConfidenceConfig& cfg) {
  return 1.0 / (1.0 + std::exp(-cfg.beta * (raw_score - mean_score)));
}

double raw_authority_score(const KnowledgeGraph& g, TripleId member,
                           std::string_view group_context,
                           GenerationClient& client) {
  GenerationRequest req;
  req.kind = RequestKind::authority;
  const std::string text = triple_text(g, member);
  const std::string source = member_source(g, member);
  req.prompt =
      render_authority_prompt(text, source, std::string(group_context));
  req.key = make_request_key(RequestKind::authority,
                             {text, "source=" + source});
  const std::string reply = client.complete(req);

  std::string_view line(reply);
  if (auto nl = line.find('\n'); nl != std::string_view::npos)
    line = line.substr(0, nl);
  while (!line.empty() && (line.front() == ' ' || line.front() == '\t'))
    line.remove_prefix(1);
  while (!line.empty() &&
         (line.back() == ' ' || line.back() == '\t' || line.back() == '\r'))
    line.remove_suffix(1);

  double value = 0.0;
  auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), value);
  if (ec != std::errc{} || ptr != line.data() + line.size())
    raise(Errc::reply_parse_error,
          "authority reply must start with a decimal: '" + reply + "'");
  if (value < -10.0 || value > 10.0)
    raise(Errc::reply_parse_error,
          "authority score out of [-10,10]: " + std::to_string(value));
  return value;
}

double node_authority(double auth_llm, double auth_hist,
                      const ConfidenceConfig& cfg) {
  return cfg.alpha * auth_llm + (1.0 - cfg.alpha) * auth_hist;
}

MccResult mcc(std::span<const HomologousSubgraph> subgraphs,
              const KnowledgeGraph& g, const ConfidenceConfig& cfg,
              GenerationClient* client, const SourceHistory& hist,
              const MccOptions& opts) {
  MccResult out;
  for (const auto& sg : subgraphs) {
    MccGroupResult gr;
    gr.key = sg.key();

    if (!opts.score_nodes) {
      // Scoring disabled: every member passes through unexamined.
      for (TripleId m : sg.members) {
        gr.scored.push_back({m, 0.0, 0.0, 0.0, true, {}});
        out.kept.push_back(m);
      }
      out.groups.push_back(std::move(gr));
      continue;
    }

    gr.graph_confidence = graph_confidence(sg, g, cfg.similarity_mode);

    std::vector<std::string> contents;
    contents.reserve(sg.members.size());
    for (TripleId m : sg.members) contents.push_back(member_content(g, m));

    std::vector<double> consistency(sg.members.size(), 0.0);
    for (std::size_t i = 0; i < sg.members.size(); ++i) {
      std::vector<std::string> peers;
      peers.reserve(contents.size() - 1);
      for (std::size_t k = 0; k < contents.size(); ++k)
        if (k != i) peers.push_back(contents[k]);
      consistency[i] = node_consistency(contents[i], peers,
                                        cfg.similarity_mode);
    }

    // Confident groups are consulted coarsely (top_k members by
    // consistency); uncertain ones are expanded to every member.
    std::vector<std::size_t> order(sg.members.size());
    std::iota(order.begin(), order.end(), 0);
    if (opts.graph_gating && *gr.graph_confidence >= cfg.graph_threshold &&
        sg.members.size() > cfg.top_k) {
      std::stable_sort(order.begin(), order.end(),
                       [&](std::size_t a, std::size_t b) {
                         return consistency[a] > consistency[b];
                       });
      for (std::size_t i = cfg.top_k; i < order.size(); ++i)
        gr.unconsulted.push_back(sg.members[order[i]]);
      order.resize(cfg.top_k);
      std::sort(order.begin(), order.end());
      std::sort(gr.unconsulted.begin(), gr.unconsulted.end());
    }

    // Authority, generation-assessed side first (batched so the raw scores
    // can be centered on the group mean).
    std::string group_context;
    for (std::size_t i = 0; i < sg.members.size(); ++i) {
      group_context += triple_text(g, sg.members[i]) + " [" +
                       member_source(g, sg.members[i]) + "]\n";
    }
    std::vector<std::optional<double>> raw(order.size());
    std::vector<std::string> failure(order.size());
    if (cfg.alpha > 0.0) {
      if (client == nullptr)
        raise(Errc::precondition,
              "authority scoring needs a client when alpha > 0");
      for (std::size_t i = 0; i < order.size(); ++i) {
        try {
          raw[i] = raw_authority_score(g, sg.members[order[i]], group_context,
                                       *client);
        } catch (const Error& e) {
          if (!opts.fail_soft) throw;
          failure[i] = e.what();
        }
      }
    }
    double mean = 0.0;
    std::size_t scored_count = 0;
    for (const auto& r : raw)
      if (r) {
        mean += *r;
        ++scored_count;
      }
    if (scored_count > 0) mean /= static_cast<double>(scored_count);

    for (std::size_t i = 0; i < order.size(); ++i) {
      const std::size_t idx = order[i];
      NodeConfidence nc;
      nc.member = sg.members[idx];
      nc.consistency = consistency[idx];

      if (!failure[i].empty()) {
        nc.kept = false;
        nc.reason = "client failure: " + failure[i];
        gr.scored.push_back(std::move(nc));
        out.filtered.push_back(sg.members[idx]);
        continue;
      }

      double llm = raw[i] ? authority_llm(*raw[i], mean, cfg) : 0.0;
      double histv = 0.0;
      if (cfg.alpha < 1.0) {
        histv = authority_hist(hist, member_source(g, nc.member), {});
        ++out.history_lookups;
      }
      nc.authority = node_authority(llm, histv, cfg);
      nc.total = nc.consistency + nc.authority;
      nc.kept = !opts.node_filtering || nc.total > cfg.node_threshold;
      if (!nc.kept) nc.reason = "confidence below threshold";

      if (nc.kept)
        out.kept.push_back(nc.member);
      else
        out.filtered.push_back(nc.member);
      gr.scored.push_back(std::move(nc));
    }

    out.groups.push_back(std::move(gr));
  }

  std::sort(out.kept.begin(), out.kept.end());
  std::sort(out.filtered.begin(), out.filtered.end());
  return out;
}

}  // namespace multirag
