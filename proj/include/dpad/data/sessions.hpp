// Copyright 2026 The dpad Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace dpad::data {

// Token-id sessions with session-level labels (0 normal, 1 abnormal).
struct SequenceCorpus {
  int vocab = 0;
  std::vector<std::vector<int>> sessions;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return sessions.size(); }
};

// Session generator shaped like a logged execution path: a token graph
// whose allowed transitions restrict how one entry may follow another.
struct SyntheticLogModel {
  int vocab = 0;
  std::vector<int> start_tokens;
  std::vector<std::vector<int>> successors;       // per token, ascending ids
  std::vector<std::vector<double>> branch_probs;  // aligned with successors
  std::vector<std::uint8_t> terminal;             // session may end on this token
  int max_len = 48;

  // Anomaly mix used for abnormal sessions (swap / insert / truncate).
  double p_swap = 0.6;
  double p_insert = 0.4;
  double p_truncate = 0.0;

  // Anomalies are injected after these tokens when possible, so the
  // corpus carries a small recurring family of anomalous patterns rather
  // than one-off corruption. Empty means any position.
  std::vector<int> anomaly_states;

  void validate() const;

  // Membership oracle: does the automaton generate this exact session?
  bool accepts(std::span<const int> session) const;

  // True if `next` may follow `prev`.
  bool allowed(int prev, int next) const;

  // The fixed low-id forbidden successors used as intruder tokens.
  std::vector<int> intruder_pool(int prev, std::size_t max_size = 2) const;

  // Default 29-token workflow automaton.
  static SyntheticLogModel workflow29();
};

// n_normal automaton-consistent sessions plus n_abnormal sessions that the
// automaton rejects (each carries at least one forbidden transition or an
// illegal ending). Raises GenerationError when the automaton admits no
// forbidden transition anywhere.
SequenceCorpus gen_sessions(const SyntheticLogModel& model, int n_normal, int n_abnormal,
                            std::uint64_t seed);

// (history, next-token) training pairs.
struct WindowPair {
  std::vector<int> history;
  int next = 0;
  std::size_t session = 0;  // index of the originating session
};

// Every length-(h+1) sliding window of every session. Sessions shorter than
// h+1 are left-padded with the reserved token `corpus.vocab` when
// `pad_short` is set, and skipped otherwise.
std::vector<WindowPair> window_sequences(const SequenceCorpus& corpus, int h,
                                         bool pad_short = true);

// Plain-text corpus: one space-separated token-id session per line, with a
// companion label file holding one 0/1 per line.
SequenceCorpus load_sequences(const std::string& sessions_path,
                              const std::string& labels_path = "");
void write_sequences(const SequenceCorpus& corpus, const std::string& sessions_path,
                     const std::string& labels_path = "");

}  // namespace dpad::data
