#pragma once

#include <filesystem>
#include <string_view>

namespace coda {

// Writes `text` to a temporary sibling of `path` and renames it into place,
// so readers never observe a partial file. Errors: IoError.
void write_file_atomic(const std::filesystem::path& path, std::string_view text);

}  // namespace coda
