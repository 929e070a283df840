#ifndef DERMBENCH_ERROR_HPP
#define DERMBENCH_ERROR_HPP

#include <stdexcept>
#include <string>

namespace dermbench {

enum class ErrorCode {
    invalid_argument = 1,
    dimension_mismatch = 2,
    capacity = 3,          // partition cannot produce k non-empty groups
    non_real_result = 4,   // imaginary residue above tolerance
    parse = 5,
    validation = 6,
    io = 7,
    internal = 8,
};

class Error : public std::runtime_error {
public:
    Error(ErrorCode code, const std::string& what)
        : std::runtime_error(what), code_(code) {}
    ErrorCode code() const noexcept { return code_; }

private:
    ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
    throw Error(code, what);
}

} // namespace dermbench

#endif
