#pragma once

#include <stdexcept>
#include <string>

namespace cuedecomp {

enum class Errc {
    invalid_argument,
    io_error,
    decode_error,
    unsupported_bit_depth,
    unsupported_format,
    dimension_mismatch,
    out_of_range,
    undefined,
    schema_error,
    not_found,
};

const char* errc_name(Errc code);

class Error : public std::runtime_error {
public:
    Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    Errc code() const noexcept { return code_; }

private:
    Errc code_;
};

[[noreturn]] inline void fail(Errc code, const std::string& what) { throw Error(code, what); }

inline void require(bool cond, Errc code, const std::string& what)
{
    if (!cond) fail(code, what);
}

} // namespace cuedecomp
