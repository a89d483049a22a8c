#pragma once

#define FRACCOMP_VERSION_MAJOR 0
#define FRACCOMP_VERSION_MINOR 1
#define FRACCOMP_VERSION_PATCH 0
#define FRACCOMP_VERSION "0.1.0"

namespace fraccomp {
inline const char* version() { return FRACCOMP_VERSION; }
}
