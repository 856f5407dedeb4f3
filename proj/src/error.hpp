#pragma once

#include <stdexcept>
#include <string>

namespace dpc {

// Error taxonomy shared by the C++ core, the C API status codes and the
// CLI exit codes. Keep the numeric values in sync with dpcollapse.h.
enum class ErrorCategory : int {
    config      = 1,  // invalid input: bad geometry, bad intensities, bad config file
    guard       = 2,  // numeric guard tripped: weak-field violated, negative energy
    statistical = 3,  // a statistical acceptance check failed
    io          = 4,  // filesystem or serialization failure
    internal    = 5,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCategory cat, std::string msg)
        : std::runtime_error(std::move(msg)), category_(cat) {}

    ErrorCategory category() const noexcept { return category_; }

private:
    ErrorCategory category_;
};

[[noreturn]] inline void fail_config(std::string msg) {
    throw Error(ErrorCategory::config, std::move(msg));
}
[[noreturn]] inline void fail_guard(std::string msg) {
    throw Error(ErrorCategory::guard, std::move(msg));
}
[[noreturn]] inline void fail_statistical(std::string msg) {
    throw Error(ErrorCategory::statistical, std::move(msg));
}
[[noreturn]] inline void fail_io(std::string msg) {
    throw Error(ErrorCategory::io, std::move(msg));
}
[[noreturn]] inline void fail_internal(std::string msg) {
    throw Error(ErrorCategory::internal, std::move(msg));
}

}  // namespace dpc
