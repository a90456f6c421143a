#pragma once

namespace cactus::cli {

/// Entry point for the `cactus` tool; returns the process exit code.
/// Kept separate from main() so tests can drive commands in-process.
int run(int argc, const char* const* argv);

} // namespace cactus::cli
