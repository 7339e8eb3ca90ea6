#ifndef CLICKCRAFT_VERSION_HPP
#define CLICKCRAFT_VERSION_HPP

namespace clickcraft {
inline constexpr const char* version = "0.1.0";
}

#endif
