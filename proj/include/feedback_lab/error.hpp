#pragma once

#include <stdexcept>
#include <string>

namespace feedback_lab {

// Invalid construction or configuration parameters.
struct ConfigError : std::runtime_error {
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

// Malformed or inconsistent data handed to an operation.
struct DataError : std::runtime_error {
    explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

// Corpus files that cannot be read or parsed; the message names the path.
struct IngestError : std::runtime_error {
    explicit IngestError(const std::string& what) : std::runtime_error(what) {}
};

// Scoring or prediction requested before any document was fitted.
struct UntrainedModelError : std::runtime_error {
    UntrainedModelError() : std::runtime_error("model has no trained class") {}
};

// Output files that cannot be written.
struct IoError : std::runtime_error {
    explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace feedback_lab
