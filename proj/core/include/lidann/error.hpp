#pragma once

#include <stdexcept>
#include <string>

namespace lidann {

/// Caller violated a documented precondition (bad argument, dimension
/// mismatch, out-of-range parameter).
struct UsageError : std::invalid_argument {
    explicit UsageError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// A file on disk does not match the expected byte layout.
struct FormatError : std::runtime_error {
    explicit FormatError(const std::string& msg) : std::runtime_error(msg) {}
};

/// A neighbor-distance profile carries no usable information for the
/// intrinsic-dimension estimate (all distances equal the radius, or zero).
struct DegenerateDistances : std::runtime_error {
    explicit DegenerateDistances(const std::string& msg) : std::runtime_error(msg) {}
};

/// Model optimization produced a non-finite loss.
struct TrainingError : std::runtime_error {
    explicit TrainingError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An index failed an internal consistency check (e.g. an id missing from
/// every inverted list).
struct IndexCorruption : std::runtime_error {
    explicit IndexCorruption(const std::string& msg) : std::runtime_error(msg) {}
};

/// A trained model emitted a non-finite intermediate value at inference.
struct PredictionError : std::runtime_error {
    explicit PredictionError(const std::string& msg) : std::runtime_error(msg) {}
};

/// An orchestration step cannot continue (e.g. every labeled row was dropped).
struct PipelineError : std::runtime_error {
    explicit PipelineError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace lidann
