#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace clickpath {

// Failure categories. The CLI maps DataError subclasses to exit code 2 and
// InvariantViolation to exit code 3.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Bad input data: malformed logs, unknown URLs, empty datasets.
class DataError : public Error {
public:
    using Error::Error;
};

class MalformedUrl : public DataError {
public:
    explicit MalformedUrl(const std::string& url);
};

class SchemaViolation : public DataError {
public:
    SchemaViolation(std::size_t line, std::string field, const std::string& detail);

    std::size_t line() const noexcept { return line_; }
    const std::string& field() const noexcept { return field_; }

private:
    std::size_t line_;
    std::string field_;
};

class OrderViolation : public DataError {
public:
    OrderViolation(std::size_t line, const std::string& session_id);

    std::size_t line() const noexcept { return line_; }

private:
    std::size_t line_;
};

class EmptySession : public DataError {
public:
    explicit EmptySession(const std::string& session_id);
};

class EmptyPath : public DataError {
public:
    EmptyPath();
};

class EmptyDataset : public DataError {
public:
    EmptyDataset();
};

class EmptyCorpus : public DataError {
public:
    EmptyCorpus();
};

class LabelMissing : public DataError {
public:
    explicit LabelMissing(const std::string& session_id);
};

class EmptySample : public DataError {
public:
    EmptySample();
};

class EmptyTruth : public DataError {
public:
    EmptyTruth();
};

class FewerThanTwoGraphs : public DataError {
public:
    FewerThanTwoGraphs();
};

/// Caller passed an argument outside the operation's domain.
class InvalidArgument : public DataError {
public:
    using DataError::DataError;
};

class InvalidParams : public InvalidArgument {
public:
    using InvalidArgument::InvalidArgument;
};

class InvalidK : public InvalidArgument {
public:
    InvalidK(std::size_t k, std::size_t n);
};

class IndexOutOfRange : public InvalidArgument {
public:
    IndexOutOfRange(std::size_t index, std::size_t size);
};

class ShapeMismatch : public InvalidArgument {
public:
    ShapeMismatch(const std::string& op, std::size_t ar, std::size_t ac, std::size_t br,
                  std::size_t bc);
};

/// An internal contract was broken (non-finite weights, inconsistent state).
class InvariantViolation : public Error {
public:
    using Error::Error;
};

}  // namespace clickpath
