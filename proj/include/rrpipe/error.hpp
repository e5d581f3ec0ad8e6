#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace rrpipe {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Bad input data or configuration. The CLI maps these to exit code 1.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class MissingFile : public ValidationError {
 public:
  explicit MissingFile(const std::string& path)
      : ValidationError("missing file: " + path), path_(path) {}
  const std::string& path() const { return path_; }

 private:
  std::string path_;
};

class MalformedRecord : public ValidationError {
 public:
  MalformedRecord(std::size_t line, const std::string& why)
      : ValidationError("malformed record at line " + std::to_string(line) + ": " + why),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class DuplicateId : public ValidationError {
 public:
  DuplicateId(const std::string& kind, const std::string& id)
      : ValidationError("duplicate " + kind + ": " + id), id_(id) {}
  const std::string& id() const { return id_; }

 private:
  std::string id_;
};

class DuplicateDocId : public DuplicateId {
 public:
  explicit DuplicateDocId(const std::string& id) : DuplicateId("doc_id", id) {}
};

class DuplicateQueryId : public DuplicateId {
 public:
  explicit DuplicateQueryId(const std::string& id) : DuplicateId("query_id", id) {}
};

class NegativeGrade : public ValidationError {
 public:
  NegativeGrade(std::size_t line, long long grade)
      : ValidationError("negative relevance grade " + std::to_string(grade) + " at line " +
                        std::to_string(line)),
        line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class EmptyCorpus : public ValidationError {
 public:
  EmptyCorpus() : ValidationError("cannot build an index over an empty corpus") {}
};

class SnapshotError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class UnknownVariant : public ValidationError {
 public:
  explicit UnknownVariant(const std::string& name)
      : ValidationError("unknown model variant: " + name), name_(name) {}
  const std::string& name() const { return name_; }

 private:
  std::string name_;
};

class MissingAxis : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

class EmptyResults : public Error {
 public:
  EmptyResults() : Error("no evaluable query results to aggregate") {}
};

// Failures surfaced by the LLM gateway.
class GatewayError : public Error {
 public:
  using Error::Error;
};

class ContextOverflow : public GatewayError {
 public:
  ContextOverflow(long long tokens, long long limit)
      : GatewayError("prompt of ~" + std::to_string(tokens) + " tokens exceeds context limit " +
                     std::to_string(limit)) {}
};

class AuthError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class ProviderUnavailable : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

// Thrown by providers. Transient failures are retried by the gateway; the
// rest become ProviderUnavailable immediately.
class ProviderError : public GatewayError {
 public:
  using GatewayError::GatewayError;
};

class TransientProviderError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

}  // namespace rrpipe
