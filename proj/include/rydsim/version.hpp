#pragma once

namespace rydsim {

#ifndef RYDSIM_GIT_REV
#define RYDSIM_GIT_REV "unknown"
#endif

inline constexpr const char* version_string = "rydsim 0.1.0+" RYDSIM_GIT_REV;

}  // namespace rydsim
