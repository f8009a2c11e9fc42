#include "extsum/decoder.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace extsum {

void DecodeConfig::Validate() const {
  if (beam_size < 1) throw std::invalid_argument("beam_size must be >= 1");
  if (max_decode_len < 1) throw std::invalid_argument("max_decode_len must be >= 1");
  if (!(length_penalty >= 0.0)) throw std::invalid_argument("length_penalty must be >= 0");
}

namespace {

struct Hypothesis {
  std::vector<int> tokens;
  std::vector<double> step_logprobs;
  double logprob = 0.0;
  ExtModel::DecoderState state;
};

struct Expansion {
  std::size_t parent;
  int token;
  double logprob;
};

double FinishedScore(double logprob, std::size_t length, double penalty) {
  if (penalty == 0.0) return logprob;
  return logprob / std::pow(static_cast<double>(length), penalty);
}

Candidate MakeCandidate(const Hypothesis& h, bool finished, const ExtModel& model,
                        const SourceInput& source, double penalty) {
  Candidate c;
  c.tokens = h.tokens;
  c.text = DecodeTokens(h.tokens, model.vocab(), source);
  c.logprob = h.logprob;
  c.step_logprobs = h.step_logprobs;
  c.finished = finished;
  c.score = finished ? FinishedScore(h.logprob, h.tokens.size() + 1, penalty) : h.logprob;
  return c;
}

bool ByScore(const Candidate& a, const Candidate& b) { return a.score > b.score; }

struct BeamResult {
  std::vector<Candidate> finished;
  std::vector<Candidate> unfinished;
};

// Shrinking beam: each step keeps the best (beam - |finished|) expansions;
// those ending in <eos> move to the finished pool.
BeamResult RunBeam(const ExtModel& model, const SourceInput& source, int aspect,
                   const DecodeConfig& config) {
  config.Validate();
  Graph g(false);
  const auto enc = model.BuildEncoded(g, source, aspect);
  std::vector<Hypothesis> live(1);
  live[0].state = model.InitialState(g, enc);
  BeamResult out;
  const auto beam = static_cast<std::size_t>(config.beam_size);

  for (int t = 0; t < config.max_decode_len && !live.empty(); ++t) {
    std::vector<Expansion> expansions;
    std::vector<ExtModel::DecoderState> next_states;
    const std::size_t room = beam - out.finished.size();
    for (std::size_t i = 0; i < live.size(); ++i) {
      const int prev = live[i].tokens.empty() ? Vocabulary::kBos : live[i].tokens.back();
      const auto step = model.BuildStep(g, enc, source, prev, live[i].state);
      next_states.push_back(step.next);
      const Mat& dist = g.value(step.distribution);
      std::vector<Expansion> local;
      for (Eigen::Index k = 0; k < dist.rows(); ++k) {
        const double p = dist(k, 0);
        if (p > 0.0) local.push_back({i, static_cast<int>(k), std::log(p)});
      }
      const std::size_t keep = std::min(room, local.size());
      std::partial_sort(local.begin(), local.begin() + static_cast<std::ptrdiff_t>(keep),
                        local.end(), [](const Expansion& a, const Expansion& b) {
                          if (a.logprob != b.logprob) return a.logprob > b.logprob;
                          return a.token < b.token;
                        });
      local.resize(keep);
      expansions.insert(expansions.end(), local.begin(), local.end());
    }
    std::stable_sort(expansions.begin(), expansions.end(),
                     [&](const Expansion& a, const Expansion& b) {
                       return live[a.parent].logprob + a.logprob >
                              live[b.parent].logprob + b.logprob;
                     });
    if (expansions.size() > room) expansions.resize(room);

    std::vector<Hypothesis> next;
    for (const auto& e : expansions) {
      Hypothesis h = live[e.parent];
      h.logprob += e.logprob;
      h.step_logprobs.push_back(e.logprob);
      h.state = next_states[e.parent];
      if (e.token == Vocabulary::kEos) {
        out.finished.push_back(MakeCandidate(h, true, model, source, config.length_penalty));
      } else {
        h.tokens.push_back(e.token);
        next.push_back(std::move(h));
      }
    }
    live = std::move(next);
  }
  for (const auto& h : live) {
    out.unfinished.push_back(MakeCandidate(h, false, model, source, config.length_penalty));
  }
  std::stable_sort(out.finished.begin(), out.finished.end(), ByScore);
  std::stable_sort(out.unfinished.begin(), out.unfinished.end(), ByScore);
  return out;
}

SourceInput SourceFor(const ExtModel& model, const std::vector<std::string>& sentences) {
  if (sentences.empty()) throw std::invalid_argument("cannot decode an empty input");
  return PrepareSource(sentences, model.vocab());
}

std::string AspectLabel(const ExtModel& model, int aspect) {
  return aspect == model.null_aspect() ? std::string()
                                       : model.aspect_names().at(static_cast<std::size_t>(aspect));
}

}  // namespace

GenerationRecord BeamSearch(const ExtModel& model, const std::vector<std::string>& sentences,
                            int aspect, const DecodeConfig& config) {
  const SourceInput source = SourceFor(model, sentences);
  BeamResult beam = RunBeam(model, source, aspect, config);
  GenerationRecord record;
  record.aspect = AspectLabel(model, aspect);
  if (beam.finished.empty()) {
    record.candidates = std::move(beam.unfinished);
    record.padded = true;
  } else {
    record.candidates = std::move(beam.finished);
  }
  record.chosen = record.candidates.front();
  return record;
}

Candidate GreedyDecode(const ExtModel& model, const std::vector<std::string>& sentences,
                       int aspect, int max_decode_len) {
  if (max_decode_len < 1) throw std::invalid_argument("max_decode_len must be >= 1");
  const SourceInput source = SourceFor(model, sentences);
  Graph g(false);
  const auto enc = model.BuildEncoded(g, source, aspect);
  Hypothesis h;
  h.state = model.InitialState(g, enc);
  for (int t = 0; t < max_decode_len; ++t) {
    const int prev = h.tokens.empty() ? Vocabulary::kBos : h.tokens.back();
    const auto step = model.BuildStep(g, enc, source, prev, h.state);
    const Mat& dist = g.value(step.distribution);
    Eigen::Index best = 0;
    for (Eigen::Index k = 1; k < dist.rows(); ++k) {
      if (dist(k, 0) > dist(best, 0)) best = k;
    }
    const double lp = std::log(dist(best, 0));
    h.logprob += lp;
    h.step_logprobs.push_back(lp);
    h.state = step.next;
    if (best == Vocabulary::kEos) return MakeCandidate(h, true, model, source, 0.0);
    h.tokens.push_back(static_cast<int>(best));
  }
  return MakeCandidate(h, false, model, source, 0.0);
}

GenerationRecord TopKGenerate(const ExtModel& model, const std::vector<std::string>& sentences,
                              std::optional<int> aspect, int k, const DecodeConfig& config) {
  if (k < 1) throw std::invalid_argument("K must be >= 1");
  const SourceInput source = SourceFor(model, sentences);
  const int a = aspect.value_or(model.null_aspect());
  BeamResult beam = RunBeam(model, source, a, config);
  GenerationRecord record;
  record.aspect = AspectLabel(model, a);
  if (k > config.beam_size) {
    k = config.beam_size;
    record.k_capped = true;
  }
  const auto want = static_cast<std::size_t>(k);
  record.candidates = std::move(beam.finished);
  if (record.candidates.size() > want) record.candidates.resize(want);
  for (std::size_t i = 0; record.candidates.size() < want && i < beam.unfinished.size(); ++i) {
    record.candidates.push_back(beam.unfinished[i]);
    record.padded = true;
  }
  record.chosen = record.candidates.front();
  return record;
}

std::string GenerationToJsonLine(const GenerationRecord& record) {
  nlohmann::json cands = nlohmann::json::array();
  for (const auto& c : record.candidates) {
    cands.push_back({{"text", c.text}, {"logprob", c.logprob}});
  }
  nlohmann::json j = {{"product_id", record.product_id},
                      {"aspect", record.aspect},
                      {"summary", record.chosen.text},
                      {"candidates", cands}};
  if (record.padded) j["padded"] = true;
  if (record.k_capped) j["k_capped"] = true;
  return j.dump();
}

GenerationRecord GenerationFromJsonLine(const std::string& line) {
  const auto j = nlohmann::json::parse(line);
  GenerationRecord r;
  r.product_id = j.at("product_id").get<std::string>();
  r.aspect = j.at("aspect").get<std::string>();
  r.chosen.text = j.at("summary").get<std::string>();
  if (j.contains("candidates")) {
    for (const auto& c : j.at("candidates")) {
      Candidate cand;
      cand.text = c.at("text").get<std::string>();
      cand.logprob = c.at("logprob").get<double>();
      cand.score = cand.logprob;
      r.candidates.push_back(std::move(cand));
    }
  }
  if (!r.candidates.empty() && r.candidates.front().text == r.chosen.text) {
    r.chosen = r.candidates.front();
  }
  r.padded = j.value("padded", false);
  r.k_capped = j.value("k_capped", false);
  return r;
}

}  // namespace extsum
