#include "clickpath/error.hpp"

#include <utility>

namespace clickpath {

MalformedUrl::MalformedUrl(const std::string& url) : DataError("malformed URL: '" + url + "'") {}

SchemaViolation::SchemaViolation(std::size_t line, std::string field, const std::string& detail)
    : DataError("line " + std::to_string(line) + ": field '" + field + "': " + detail),
      line_(line),
      field_(std::move(field)) {}

OrderViolation::OrderViolation(std::size_t line, const std::string& session_id)
    : DataError("line " + std::to_string(line) + ": timestamp decreases within session '" +
                session_id + "'"),
      line_(line) {}

EmptySession::EmptySession(const std::string& session_id)
    : DataError("session '" + session_id + "' has no navigation events") {}

EmptyPath::EmptyPath() : DataError("action path is empty") {}
EmptyDataset::EmptyDataset() : DataError("dataset is empty") {}
EmptyCorpus::EmptyCorpus() : DataError("embedding corpus has no pairs") {}
LabelMissing::LabelMissing(const std::string& session_id)
    : DataError("path '" + session_id + "' has no behavior label") {}
EmptySample::EmptySample() : DataError("sample is empty") {}
EmptyTruth::EmptyTruth() : DataError("truth sequence is empty") {}
FewerThanTwoGraphs::FewerThanTwoGraphs() : DataError("overlap analysis needs at least two graphs") {}

InvalidK::InvalidK(std::size_t k, std::size_t n)
    : InvalidArgument("invalid fold count k=" + std::to_string(k) + " for " + std::to_string(n) +
                      " items") {}

IndexOutOfRange::IndexOutOfRange(std::size_t index, std::size_t size)
    : InvalidArgument("index " + std::to_string(index) + " out of range [0, " +
                      std::to_string(size) + ")") {}

ShapeMismatch::ShapeMismatch(const std::string& op, std::size_t ar, std::size_t ac, std::size_t br,
                             std::size_t bc)
    : InvalidArgument(op + ": shape mismatch " + std::to_string(ar) + "x" + std::to_string(ac) +
                      " vs " + std::to_string(br) + "x" + std::to_string(bc)) {}

}  // namespace clickpath
