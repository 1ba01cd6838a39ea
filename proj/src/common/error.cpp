#include "common/error.hpp"

namespace cuedecomp {

const char* errc_name(Errc code)
{
    switch (code) {
    case Errc::invalid_argument: return "invalid argument";
    case Errc::io_error: return "i/o error";
    case Errc::decode_error: return "decode error";
    case Errc::unsupported_bit_depth: return "unsupported bit depth";
    case Errc::unsupported_format: return "unsupported format";
    case Errc::dimension_mismatch: return "dimension mismatch";
    case Errc::out_of_range: return "out of range";
    case Errc::undefined: return "undefined";
    case Errc::schema_error: return "schema error";
    case Errc::not_found: return "not found";
    }
    return "unknown";
}

} // namespace cuedecomp
