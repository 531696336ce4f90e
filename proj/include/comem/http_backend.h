// Copyright 2026 The ComEM Authors.
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

#ifndef COMEM_HTTP_BACKEND_H_
#define COMEM_HTTP_BACKEND_H_

#include <chrono>
#include <cstddef>
#include <memory>
#include <string>

#include "comem/backend.h"

namespace comem {

struct HttpBackendConfig {
  // scheme://host[:port], e.g. "https://api.openai.com".
  std::string endpoint;
  std::string path = "/v1/chat/completions";
  std::string api_key;
  std::string model;
  // Maximum requests in flight across all threads.
  std::size_t parallelism = 4;
  // Retries after the first attempt for transient failures.
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds max_backoff{8000};
  std::chrono::seconds timeout{120};
  // Ask for top-token log-probabilities when a request wants probabilities.
  bool logprobs = false;
  int top_logprobs = 5;
  PriceTable prices;
};

// Chat-completions request body. Deterministic: identical inputs give
// identical bytes.
std::string BuildChatRequestBody(const BackendRequest &request,
                                 const HttpBackendConfig &config);

// Extracts message content, usage and, when present, label probabilities.
// Label probabilities come from the first generated position whose
// top-logprob alternatives name any expected label, renormalized over the
// labels found. Throws BackendError on a malformed body.
BackendResponse ParseChatResponse(const std::string &body, const LabelSet &expected);

// HTTP status codes worth retrying: 408, 409, 425, 429 and 5xx.
bool IsRetryableStatus(int status);

class HttpBackend : public Backend {
 public:
  explicit HttpBackend(HttpBackendConfig config);
  ~HttpBackend() override;

  // One POST per attempt with exponential backoff between attempts.
  BackendResponse Complete(const BackendRequest &request) override;

  std::string model_name() const override { return config_.model; }
  const PriceTable &prices() const override { return config_.prices; }
  bool provides_probabilities() const override { return config_.logprobs; }

 private:
  struct Impl;
  HttpBackendConfig config_;
  std::unique_ptr<Impl> impl_;
};

}  // namespace comem

#endif  // COMEM_HTTP_BACKEND_H_
