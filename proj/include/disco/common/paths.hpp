#pragma once

#include <cstdlib>
#include <filesystem>

#ifndef DISCO_DEFAULT_DATA_DIR
#define DISCO_DEFAULT_DATA_DIR "data"
#endif

namespace disco {

/// $DISCO_DATA_DIR if set, otherwise the data directory of the source tree.
inline std::filesystem::path default_data_dir() {
  if (const char* env = std::getenv("DISCO_DATA_DIR"); env != nullptr && *env != '\0') return env;
  return DISCO_DEFAULT_DATA_DIR;
}

}  // namespace disco
