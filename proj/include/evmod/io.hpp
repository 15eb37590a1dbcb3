#pragma once

#include <string>

namespace evmod {

std::string read_file(const std::string& path);

// Writes to a sibling temp file and renames over the target, so readers never
// observe a partially written file.
void atomic_write_file(const std::string& path, const std::string& contents);

}  // namespace evmod
