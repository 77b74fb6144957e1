// Copyright 2026 The rcnqa Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//    http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef RCNQA_SERIALIZE_HPP
#define RCNQA_SERIALIZE_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "rcnqa/model.hpp"
#include "rcnqa/trainer.hpp"

namespace rcnqa {

// All binary files share one frame: 6 magic bytes, little-endian u32 version,
// little-endian u64 header byte length, UTF-8 JSON header, then the payload
// of little-endian IEEE-754 doubles described by the header.
inline constexpr char kCheckpointMagic[7] = "RCNQA1";
inline constexpr char kDatasetMagic[7] = "RCNQD1";
inline constexpr char kLexiconMagic[7] = "RCNQL1";

void write_container(std::ostream& out, const char* magic,
                     std::uint32_t version, const nlohmann::json& header,
                     std::span<const double> payload);

struct Container {
  std::uint32_t version = 0;
  nlohmann::json header;
  std::vector<double> payload;
};

// Rejects wrong magic, versions above max_version, and truncated or
// malformed headers/payloads, each with its own message.
Container read_container(std::istream& in, const char* magic,
                         std::uint32_t max_version,
                         const std::string& source_name);
Container read_container_file(const std::string& path, const char* magic,
                              std::uint32_t max_version);

// Vocabulary + embeddings + idf + stopword hash, produced by preprocessing.
struct Lexicon {
  Vocabulary vocab;
  EmbeddingTable embeddings;
  IdfTable idf;
  std::uint64_t stopword_hash = 0;
  double coverage = 0.0;
};

void save_lexicon(const Lexicon& lex, const std::string& path);
Lexicon load_lexicon(const std::string& path);

struct Checkpoint {
  ModelParams params;
  std::optional<AdadeltaState> optimizer;
  std::optional<TrainHistory> history;
};

// Bit-exact parameter roundtrip; optimizer state and history are included
// when present so training can resume.
void save_checkpoint(const Checkpoint& ckpt, const std::string& path);
Checkpoint load_checkpoint(const std::string& path);

}  // namespace rcnqa

#endif  // RCNQA_SERIALIZE_HPP
