#ifndef SDEFIT_VERSION_HPP
#define SDEFIT_VERSION_HPP

namespace sdefit {

inline constexpr const char* kVersion = "0.1.0";

} // namespace sdefit

#endif
