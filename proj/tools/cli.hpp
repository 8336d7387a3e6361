#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace hatewatch::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUsage = 2;

// Name of the environment variable holding the default config file path.
inline constexpr const char* kConfigEnv = "HATEWATCH_CONFIG";

// args excludes the program name. Interactive prompts read from `in`.
int run(const std::vector<std::string>& args, std::istream& in, std::ostream& out,
        std::ostream& err);

}  // namespace hatewatch::cli
