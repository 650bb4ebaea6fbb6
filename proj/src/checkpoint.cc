/*
 * Copyright 2026 The RetainEX Workbench Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "retainex/checkpoint.h"

#include <bit>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"
#include "retainex/error.h"

namespace retainex {
namespace {

void AppendDouble(double value, std::string& out) {
  std::uint64_t bits = std::bit_cast<std::uint64_t>(value);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>(bits & 0xff));
    bits >>= 8;
  }
}

double ReadDouble(const char* data) {
  std::uint64_t bits = 0;
  for (int i = 7; i >= 0; --i) {
    bits = (bits << 8) | static_cast<unsigned char>(data[i]);
  }
  return std::bit_cast<double>(bits);
}

std::string FingerprintHex(std::uint64_t value) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "%016llx",
                static_cast<unsigned long long>(value));
  return buffer;
}

}  // namespace

std::string SerializeCheckpoint(const Checkpoint& checkpoint) {
  const ParamStore& params = checkpoint.model.params();
  Hyperparams hyperparams = checkpoint.hyperparams;
  hyperparams.variant = checkpoint.model.variant();
  hyperparams.hidden = checkpoint.model.hidden();
  hyperparams.beta_tanh = checkpoint.model.beta_tanh();

  nlohmann::json tensors = nlohmann::json::array();
  std::string payload;
  for (const std::string& name : params.names()) {
    const Tensor& t = params.value(name);
    tensors.push_back({{"name", name},
                       {"shape", t.shape()},
                       {"offset", payload.size()},
                       {"count", t.size()}});
    for (std::size_t i = 0; i < t.size(); ++i) AppendDouble(t.data()[i], payload);
  }
  const nlohmann::json header = {
      {"format", kCheckpointFormat},
      {"version", kCheckpointVersion},
      {"hyperparams", hyperparams.ToJson()},
      {"num_codes", checkpoint.model.num_codes()},
      {"vocabulary_fingerprint", FingerprintHex(checkpoint.vocabulary_fingerprint)},
      {"tensors", std::move(tensors)},
      {"payload_bytes", payload.size()},
      {"history", checkpoint.history.ToJson(/*include_timing=*/false)},
  };
  return header.dump() + "\n" + payload;
}

Checkpoint DeserializeCheckpoint(const std::string& bytes) {
  const std::size_t newline = bytes.find('\n');
  if (newline == std::string::npos) throw ParseError("checkpoint header missing");
  nlohmann::json header;
  try {
    header = nlohmann::json::parse(bytes.substr(0, newline));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  }
  try {
    if (header.at("format").get<std::string>() != kCheckpointFormat) {
      throw ParseError("not a checkpoint");
    }
    const int version = header.at("version").get<int>();
    if (version != kCheckpointVersion) {
      throw ParseError("unsupported checkpoint version " + std::to_string(version));
    }
    const std::size_t payload_bytes = header.at("payload_bytes").get<std::size_t>();
    const std::size_t available = bytes.size() - newline - 1;
    if (available != payload_bytes) {
      throw ParseError("checkpoint payload is " + std::to_string(available) +
                       " bytes, header declares " + std::to_string(payload_bytes));
    }
    const char* payload = bytes.data() + newline + 1;

    Checkpoint checkpoint{
        Model::Initialize(Variant::kGruBaseline, 1, 1, true, 0), {}, 0, {}};
    checkpoint.hyperparams = Hyperparams::FromJson(header.at("hyperparams"));
    checkpoint.vocabulary_fingerprint = std::stoull(
        header.at("vocabulary_fingerprint").get<std::string>(), nullptr, 16);
    checkpoint.history = TrainingHistory::FromJson(header.at("history"));

    ParamStore params;
    for (const nlohmann::json& entry : header.at("tensors")) {
      const std::vector<int> shape = entry.at("shape").get<std::vector<int>>();
      const std::size_t offset = entry.at("offset").get<std::size_t>();
      const std::size_t count = entry.at("count").get<std::size_t>();
      if (offset + 8 * count > payload_bytes) {
        throw ParseError("tensor " + entry.at("name").get<std::string>() +
                         " overruns the payload");
      }
      Tensor t(shape);
      if (t.size() != count) throw ParseError("tensor count disagrees with shape");
      for (std::size_t i = 0; i < count; ++i) {
        t.data()[i] = ReadDouble(payload + offset + 8 * i);
      }
      params.Add(entry.at("name").get<std::string>(), std::move(t));
    }
    const Hyperparams& h = checkpoint.hyperparams;
    checkpoint.model = Model::FromParams(h.variant, h.hidden,
                                         header.at("num_codes").get<int>(),
                                         h.beta_tanh, std::move(params));
    return checkpoint;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("checkpoint header: ") + e.what());
  } catch (const ArgumentError& e) {
    throw ParseError(std::string("checkpoint: ") + e.what());
  } catch (const std::invalid_argument&) {
    throw ParseError("checkpoint fingerprint is not hexadecimal");
  }
}

void SaveCheckpoint(const Checkpoint& checkpoint, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  const std::string bytes = SerializeCheckpoint(checkpoint);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing " + path);
}

Checkpoint LoadCheckpoint(const std::string& path, const CodeVocabulary* vocabulary) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  Checkpoint checkpoint = DeserializeCheckpoint(buffer.str());
  if (vocabulary != nullptr &&
      vocabulary->Fingerprint() != checkpoint.vocabulary_fingerprint) {
    throw DataError("checkpoint " + path +
                    " was trained against a different vocabulary");
  }
  if (vocabulary != nullptr && vocabulary->size() != checkpoint.model.num_codes()) {
    throw DataError("checkpoint code count differs from the vocabulary");
  }
  return checkpoint;
}

}  // namespace retainex
