/* Copyright 2026 The ShadowForge Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License. */
#pragma once

// Client for remote detectors speaking the JSON-over-HTTP bridge protocol:
// POST {endpoint}/detect with {"image_png_base64", "score_threshold"},
// answered by {"detections": [{x1, y1, x2, y2, score, label}], "model"}.

#include <openssl/evp.h>

#include <chrono>
#include <iostream>
#include <string>
#include <thread>
#include <vector>

#include <httplib.h>
#include <nlohmann/json.hpp>

#include "shadowforge/core/image_io.hpp"
#include "shadowforge/objective/detector.hpp"

namespace shadowforge {

inline std::string base64_encode(const std::string& bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<size_t>(n));
  return out;
}

// Strict decoding: length a multiple of 4, standard alphabet, '=' padding
// only at the end.
inline std::string base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) throw DomainError("base64: length is not a multiple of 4");
  const size_t pad = text.size() >= 1 && text.back() == '=' ? (text.size() >= 2 && text[text.size() - 2] == '=' ? 2 : 1) : 0;
  if (text.find('=') < text.size() - pad) throw DomainError("base64: misplaced padding");
  std::string out(3 * (text.size() / 4), '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()), static_cast<int>(text.size()));
  if (n < 0) throw DomainError("base64: invalid character");
  out.resize(static_cast<size_t>(n) - pad);
  return out;
}

struct BridgeResponse {
  std::vector<Detection> detections;
  std::string model;
};

inline nlohmann::json bridge_request(const Image& image, double score_threshold) {
  return {{"image_png_base64", base64_encode(encode_png(image))}, {"score_threshold", score_threshold}};
}

inline nlohmann::json to_json(const BridgeResponse& r) {
  nlohmann::json dets = nlohmann::json::array();
  for (const auto& d : r.detections)
    dets.push_back({{"x1", d.box.x1}, {"y1", d.box.y1}, {"x2", d.box.x2}, {"y2", d.box.y2}, {"score", d.score}, {"label", d.label}});
  return {{"detections", dets}, {"model", r.model}};
}

// Throws SchemaError carrying the raw payload on any violation.
inline BridgeResponse parse_bridge_response(const std::string& raw) {
  const auto fail = [&](const std::string& why) -> SchemaError { return SchemaError("bridge schema violation: " + why, raw); };
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(raw);
  } catch (const nlohmann::json::exception&) {
    throw fail("response is not JSON");
  }
  if (!j.is_object()) throw fail("response is not an object");
  if (!j.contains("detections") || !j["detections"].is_array()) throw fail("missing detections array");
  if (!j.contains("model") || !j["model"].is_string()) throw fail("missing model string");
  BridgeResponse r;
  r.model = j["model"].get<std::string>();
  for (const auto& d : j["detections"]) {
    if (!d.is_object()) throw fail("detection is not an object");
    for (const char* k : {"x1", "y1", "x2", "y2", "score"})
      if (!d.contains(k) || !d[k].is_number()) throw fail(std::string("detection field ") + k + " missing or not a number");
    if (!d.contains("label") || !d["label"].is_string()) throw fail("detection label missing or not a string");
    Detection det{{d["x1"].get<double>(), d["y1"].get<double>(), d["x2"].get<double>(), d["y2"].get<double>()},
                  d["score"].get<double>(), d["label"].get<std::string>()};
    try {
      validate(det);
    } catch (const DomainError& e) {
      throw fail(e.what());
    }
    r.detections.push_back(std::move(det));
  }
  return r;
}

struct BridgeOptions {
  int attempts = 4;  // one try plus three retries
  std::chrono::milliseconds backoff{200};  // doubled after every failed attempt
  std::chrono::seconds timeout{30};
};

namespace detail {

// "http://host:port/prefix" -> ("http://host:port", "/prefix")
inline std::pair<std::string, std::string> split_endpoint(const std::string& endpoint) {
  const auto scheme = endpoint.find("://");
  if (scheme == std::string::npos) throw DomainError("bridge endpoint needs a scheme: " + endpoint);
  const auto slash = endpoint.find('/', scheme + 3);
  std::string base = endpoint.substr(0, slash), prefix = slash == std::string::npos ? "" : endpoint.substr(slash);
  while (!prefix.empty() && prefix.back() == '/') prefix.pop_back();
  return {base, prefix};
}

}  // namespace detail

// Transport failures and 5xx answers are retried; anything else fails
// immediately.
inline BridgeResponse detect_remote_full(const std::string& endpoint, const Image& image, double conf_thresh,
                                         const BridgeOptions& opt = {}) {
  const auto [base, prefix] = detail::split_endpoint(endpoint);
  const std::string body = bridge_request(image, conf_thresh).dump();
  httplib::Client client(base);
  client.set_connection_timeout(opt.timeout);
  client.set_read_timeout(opt.timeout);
  client.set_write_timeout(opt.timeout);
  std::string last_error;
  auto backoff = opt.backoff;
  for (int attempt = 0; attempt < opt.attempts; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(backoff);
      backoff *= 2;
    }
    auto res = client.Post(prefix + "/detect", body, "application/json");
    if (!res) {
      last_error = httplib::to_string(res.error());
      continue;
    }
    if (res->status >= 500) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) throw NetworkError("bridge " + endpoint + " answered HTTP " + std::to_string(res->status));
    try {
      return parse_bridge_response(res->body);
    } catch (const SchemaError& e) {
      std::cerr << "bridge: " << e.what() << "; raw payload: " << e.raw_payload() << "\n";
      throw;
    }
  }
  throw NetworkError("bridge " + endpoint + " unreachable after " + std::to_string(opt.attempts) +
                     " attempts: " + last_error);
}

inline std::vector<Detection> detect_remote(const std::string& endpoint, const Image& image, double conf_thresh,
                                            const BridgeOptions& opt = {}) {
  return detect_remote_full(endpoint, image, conf_thresh, opt).detections;
}

// Black-box detector backed by a bridge endpoint. Only detections labeled
// "car" are kept.
class BridgeDetector : public Detector {
 public:
  explicit BridgeDetector(std::string endpoint, double score_floor = 0.05, BridgeOptions opt = {})
      : endpoint_(std::move(endpoint)), floor_(score_floor), opt_(opt) {}

  std::vector<Detection> evaluate(const Image& image) const override {
    std::vector<Detection> out;
    for (auto& d : detect_remote(endpoint_, image, floor_, opt_))
      if (d.label == "car") out.push_back(std::move(d));
    return out;
  }

  const std::string& endpoint() const { return endpoint_; }

 private:
  std::string endpoint_;
  double floor_;
  BridgeOptions opt_;
};

}  // namespace shadowforge
