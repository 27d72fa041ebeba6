#pragma once

#include <stdexcept>
#include <string>

namespace l2g2g {

struct ParameterError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ContractViolation : std::logic_error {
    using std::logic_error::logic_error;
};

struct SyncError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TrainError : std::runtime_error {
    TrainError(const std::string& msg, int epoch)
        : std::runtime_error(msg + " (epoch " + std::to_string(epoch) + ")"),
          epoch(epoch) {}
    int epoch;
};

struct MetricError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace l2g2g
