#ifndef EXTSUM_DECODER_HPP
#define EXTSUM_DECODER_HPP

#include <optional>
#include <string>
#include <vector>

#include "extsum/model.hpp"

namespace extsum {

struct DecodeConfig {
  int beam_size = 5;
  int max_decode_len = 80;
  // Finished scores are divided by length^length_penalty; 0 disables.
  double length_penalty = 0.0;

  void Validate() const;
};

struct Candidate {
  std::vector<int> tokens;  // extended ids, without <eos>
  std::string text;
  double logprob = 0.0;  // sum of step log-probabilities, <eos> included
  double score = 0.0;    // ranking score (logprob unless length_penalty > 0)
  bool finished = true;
  // Per-step log-probabilities; sums to logprob.
  std::vector<double> step_logprobs;
};

struct GenerationRecord {
  std::string product_id;
  std::string aspect;
  std::vector<Candidate> candidates;  // descending score
  Candidate chosen;
  // Fewer finished hypotheses than requested; padded with unfinished ones.
  bool padded = false;
  // Requested K exceeded the beam and was capped.
  bool k_capped = false;
};

// Beam search over the copy-augmented distribution. `aspect` may be the
// model's null_aspect(). Throws std::invalid_argument on empty input.
GenerationRecord BeamSearch(const ExtModel& model, const std::vector<std::string>& sentences,
                            int aspect, const DecodeConfig& config);

// Step-by-step argmax decoding.
Candidate GreedyDecode(const ExtModel& model, const std::vector<std::string>& sentences,
                       int aspect, int max_decode_len);

// The K best beam hypotheses; no aspect means the null aspect.
GenerationRecord TopKGenerate(const ExtModel& model, const std::vector<std::string>& sentences,
                              std::optional<int> aspect, int k, const DecodeConfig& config);

std::string GenerationToJsonLine(const GenerationRecord& record);
GenerationRecord GenerationFromJsonLine(const std::string& line);

}  // namespace extsum

#endif  // EXTSUM_DECODER_HPP
