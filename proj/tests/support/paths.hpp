#pragma once

#include <string>

#ifndef SUBGCACHE_DATA_DIR
#define SUBGCACHE_DATA_DIR "data"
#endif

namespace testsupport {

inline std::string data_path(const std::string& rel) {
    return std::string(SUBGCACHE_DATA_DIR) + "/" + rel;
}

}  // namespace testsupport
