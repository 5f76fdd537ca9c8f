#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace plugwatt {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Raised when a statistic needs more observations than are available.
class InsufficientSample : public Error {
 public:
  using Error::Error;
};

class RankDeficient : public Error {
 public:
  RankDeficient(std::string msg, std::vector<std::string> columns)
      : Error(std::move(msg)), columns_(std::move(columns)) {}
  const std::vector<std::string>& columns() const { return columns_; }

 private:
  std::vector<std::string> columns_;
};

class ParseError : public Error {
 public:
  ParseError(std::string file, std::size_t line, const std::string& what)
      : Error(file + ":" + std::to_string(line) + ": " + what),
        file_(std::move(file)),
        line_(line) {}
  const std::string& file() const { return file_; }
  std::size_t line() const { return line_; }

 private:
  std::string file_;
  std::size_t line_;
};

/// Collects non-fatal conditions; pass nullptr where the caller does not care.
struct Warnings {
  std::vector<std::string> messages;
  void add(std::string msg) { messages.push_back(std::move(msg)); }
  std::size_t size() const { return messages.size(); }
  bool empty() const { return messages.empty(); }
};

inline void warn(Warnings* sink, std::string msg) {
  if (sink) sink->add(std::move(msg));
}

}  // namespace plugwatt
