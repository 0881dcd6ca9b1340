#pragma once

#include <algorithm>
#include <mutex>
#include <string>
#include <vector>

#include "disco/backend/backend.hpp"

namespace fixtures {

/// Wraps a backend and records, per request, its prompt family and how many
/// history lines the user message carried.
class RecordingBackend final : public disco::backend::Backend {
 public:
  struct Call {
    disco::backend::RequestKind kind;
    std::size_t history_lines = 0;
  };

  explicit RecordingBackend(std::shared_ptr<disco::backend::Backend> inner) : inner_(std::move(inner)) {}

  std::string complete(const disco::backend::ChatRequest& request) override {
    Call c{disco::backend::detect_request_kind(request), 0};
    const std::string& user = request.messages.back().content;
    std::size_t pos = 0;
    while (pos < user.size()) {
      const auto eol = user.find('\n', pos);
      const auto line = user.substr(pos, eol == std::string::npos ? std::string::npos : eol - pos);
      if (line.rfind("Driver: ", 0) == 0 || line.rfind("Car AI: ", 0) == 0) ++c.history_lines;
      if (eol == std::string::npos) break;
      pos = eol + 1;
    }
    {
      std::lock_guard lock(mutex_);
      calls_.push_back(c);
    }
    return inner_->complete(request);
  }
  std::string id() const override { return inner_->id(); }

  std::vector<Call> calls() const {
    std::lock_guard lock(mutex_);
    return calls_;
  }

 private:
  std::shared_ptr<disco::backend::Backend> inner_;
  mutable std::mutex mutex_;
  std::vector<Call> calls_;
};

}  // namespace fixtures
