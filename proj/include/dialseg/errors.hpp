#pragma once

#include <stdexcept>
#include <string>

namespace dialseg {

enum class ErrorKind {
  InvalidArgument,
  Parse,
  DuplicateId,
  BoundaryOutOfRange,
  InvalidDialogue,
  MissingEmbedding,
  MissingScore,
  Transport,
  Generation,
  Evaluation,
  Numeric,
  Io,
};

const char* to_string(ErrorKind kind);

// Base of every error the library throws. The kind drives CLI exit codes.
class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

class InvalidArgument : public Error {
public:
  explicit InvalidArgument(const std::string& what)
      : Error(ErrorKind::InvalidArgument, what) {}
};

class ParseError : public Error {
public:
  ParseError(const std::string& source, std::size_t line, const std::string& what)
      : Error(ErrorKind::Parse,
              source + ":" + std::to_string(line) + ": " + what),
        line_(line) {}

  std::size_t line() const noexcept { return line_; }

private:
  std::size_t line_;
};

class DuplicateIdError : public Error {
public:
  explicit DuplicateIdError(const std::string& id)
      : Error(ErrorKind::DuplicateId, "duplicate dialogue id '" + id + "'"),
        id_(id) {}

  const std::string& id() const noexcept { return id_; }

private:
  std::string id_;
};

class BoundaryError : public Error {
public:
  BoundaryError(const std::string& id, const std::string& what)
      : Error(ErrorKind::BoundaryOutOfRange, "dialogue '" + id + "': " + what),
        id_(id) {}

  const std::string& id() const noexcept { return id_; }

private:
  std::string id_;
};

class InvalidDialogueError : public Error {
public:
  InvalidDialogueError(const std::string& id, const std::string& what)
      : Error(ErrorKind::InvalidDialogue, "dialogue '" + id + "': " + what) {}
};

class MissingEmbeddingError : public Error {
public:
  explicit MissingEmbeddingError(const std::string& key)
      : Error(ErrorKind::MissingEmbedding, "no embedding stored for key '" + key + "'"),
        key_(key) {}

  const std::string& key() const noexcept { return key_; }

private:
  std::string key_;
};

class MissingScoreError : public Error {
public:
  MissingScoreError(const std::string& dialogue_id, int interval)
      : Error(ErrorKind::MissingScore,
              "no coherence score for dialogue '" + dialogue_id + "' interval " +
                  std::to_string(interval)) {}
};

class TransportError : public Error {
public:
  TransportError(const std::string& endpoint, int status, const std::string& detail)
      : Error(ErrorKind::Transport,
              "embedding service " + endpoint + " failed (status " +
                  std::to_string(status) + "): " + detail),
        status_(status) {}

  int status() const noexcept { return status_; }

private:
  int status_;
};

class GenerationError : public Error {
public:
  explicit GenerationError(const std::string& what)
      : Error(ErrorKind::Generation, what) {}
};

class EvaluationError : public Error {
public:
  explicit EvaluationError(const std::string& what)
      : Error(ErrorKind::Evaluation, what) {}
};

class NumericError : public Error {
public:
  explicit NumericError(const std::string& what) : Error(ErrorKind::Numeric, what) {}
};

class IoError : public Error {
public:
  explicit IoError(const std::string& what) : Error(ErrorKind::Io, what) {}
};

}  // namespace dialseg
