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

#include "comem/http_backend.h"

#ifdef COMEM_HAVE_OPENSSL
#define CPPHTTPLIB_OPENSSL_SUPPORT
#endif

#include <algorithm>
#include <cctype>
#include <cmath>
#include <semaphore>
#include <thread>

#include "comem/error.h"
#include "httplib.h"
#include "json.hpp"

namespace comem {

namespace {

using json = nlohmann::json;

constexpr std::ptrdiff_t kMaxParallelism = 1024;

std::string NormalizeToken(std::string_view token) {
  std::string out;
  for (char c : token) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
  }
  return out;
}

}  // namespace

std::string BuildChatRequestBody(const BackendRequest &request,
                                 const HttpBackendConfig &config) {
  json body = json::object();
  body["model"] = request.model_name.empty() ? config.model : request.model_name;
  body["messages"] = json::array({{{"role", "user"}, {"content", request.prompt.text}}});
  body["temperature"] = BackendRequest::kTemperature;
  if (request.want_probabilities && config.logprobs) {
    body["logprobs"] = true;
    body["top_logprobs"] = config.top_logprobs;
  }
  return body.dump();
}

BackendResponse ParseChatResponse(const std::string &body, const LabelSet &expected) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error &e) {
    throw BackendError(std::string("malformed completion response: ") + e.what(), 200,
                       body);
  }
  BackendResponse r;
  try {
    const auto &choice = doc.at("choices").at(0);
    const auto &content = choice.at("message").at("content");
    r.text = content.is_string() ? content.get<std::string>() : std::string();

    if (doc.contains("usage") && doc["usage"].is_object()) {
      const auto &u = doc["usage"];
      Usage usage;
      usage.prompt_tokens = u.value("prompt_tokens", std::size_t{0});
      usage.completion_tokens = u.value("completion_tokens", std::size_t{0});
      r.usage = usage;
    }

    if (choice.contains("logprobs") && choice["logprobs"].is_object() &&
        choice["logprobs"].contains("content") &&
        choice["logprobs"]["content"].is_array()) {
      const auto labels = expected.Labels();
      for (const auto &position : choice["logprobs"]["content"]) {
        if (!position.contains("top_logprobs")) continue;
        std::map<std::string, double> mass;
        for (const auto &alt : position["top_logprobs"]) {
          std::string tok = NormalizeToken(alt.at("token").get<std::string>());
          for (const auto &label : labels) {
            if (tok == NormalizeToken(label)) {
              mass[label] += std::exp(alt.at("logprob").get<double>());
            }
          }
        }
        if (mass.empty()) continue;
        double total = 0.0;
        for (const auto &[_, p] : mass) total += p;
        std::map<std::string, double> probs;
        for (const auto &label : labels) {
          auto it = mass.find(label);
          probs[label] = it == mass.end() || total <= 0.0 ? 0.0 : it->second / total;
        }
        r.label_probs = std::move(probs);
        break;
      }
    }
  } catch (const json::exception &e) {
    throw BackendError(std::string("unexpected completion response shape: ") + e.what(),
                       200, body);
  }
  return r;
}

bool IsRetryableStatus(int status) {
  return status == 408 || status == 409 || status == 425 || status == 429 ||
         (status >= 500 && status <= 599);
}

struct HttpBackend::Impl {
  explicit Impl(std::size_t parallelism)
      : slots(static_cast<std::ptrdiff_t>(
            std::clamp<std::size_t>(parallelism, 1, kMaxParallelism))) {}

  std::counting_semaphore<kMaxParallelism> slots;
};

HttpBackend::HttpBackend(HttpBackendConfig config)
    : config_(std::move(config)), impl_(std::make_unique<Impl>(config_.parallelism)) {
  if (config_.endpoint.empty()) throw ValidationError("http backend needs an endpoint");
  if (config_.max_retries < 0) throw ValidationError("max_retries must be >= 0");
}

HttpBackend::~HttpBackend() = default;

BackendResponse HttpBackend::Complete(const BackendRequest &request) {
  const std::string body = BuildChatRequestBody(request, config_);
  httplib::Headers headers;
  if (!config_.api_key.empty()) {
    headers.emplace("Authorization", "Bearer " + config_.api_key);
  }

  auto backoff = config_.initial_backoff;
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff = std::min(backoff * 2, config_.max_backoff);
    }
    httplib::Result res;
    {
      impl_->slots.acquire();
      struct Release {
        std::counting_semaphore<kMaxParallelism> &s;
        ~Release() { s.release(); }
      } release{impl_->slots};
      httplib::Client client(config_.endpoint);
      client.set_connection_timeout(config_.timeout);
      client.set_read_timeout(config_.timeout);
      client.set_write_timeout(config_.timeout);
      res = client.Post(config_.path, headers, body, "application/json");
    }
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      return ParseChatResponse(res->body, request.prompt.expected_labels);
    }
    if (!IsRetryableStatus(res->status)) {
      throw BackendError("completion request failed with HTTP " +
                             std::to_string(res->status),
                         res->status, res->body);
    }
    last_error = "HTTP " + std::to_string(res->status) + ": " + res->body;
  }
  throw BackendError("retry budget exhausted after " +
                     std::to_string(config_.max_retries + 1) +
                     " attempts; last error " + last_error);
}

}  // namespace comem
