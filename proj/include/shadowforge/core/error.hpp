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

#include <stdexcept>
#include <string>

namespace shadowforge {

// Exception hierarchy. The CLI maps each family to an exit code:
// AssetError -> 2, NetworkError -> 3, DomainError -> 4, anything else -> 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed or missing input files (OBJ, images, configs, checkpoints).
class AssetError : public Error {
 public:
  using Error::Error;
};

class ParseError : public AssetError {
 public:
  ParseError(const std::string& what, int line)
      : AssetError(what + " (line " + std::to_string(line) + ")"), line_(line) {}
  int line() const noexcept { return line_; }

 private:
  int line_;
};

// Violated preconditions on numeric inputs, empty regions and similar.
class DomainError : public Error {
 public:
  using Error::Error;
};

class CapabilityError : public Error {
 public:
  using Error::Error;
};

class NetworkError : public Error {
 public:
  using Error::Error;
};

// Bridge response that parsed as JSON but violates the detection schema.
class SchemaError : public NetworkError {
 public:
  SchemaError(const std::string& what, std::string raw)
      : NetworkError(what), raw_(std::move(raw)) {}
  const std::string& raw_payload() const noexcept { return raw_; }

 private:
  std::string raw_;
};

}  // namespace shadowforge
