#pragma once

#include <filesystem>
#include <fstream>
#include <functional>
#include <string>
#include <vector>

#include "json.hpp"

namespace fet::io {

using Json = nlohmann::json;

/// Parses a line-delimited JSON document. Blank lines are skipped; the
/// callback receives each record with its 1-based line number.
void read_jsonl(std::istream& in, const std::function<void(const Json&, std::size_t)>& on_record);
void read_jsonl_file(const std::filesystem::path& file,
                     const std::function<void(const Json&, std::size_t)>& on_record);

void write_jsonl_record(std::ostream& out, const Json& record);

std::string read_text_file(const std::filesystem::path& file);
void write_text_file(const std::filesystem::path& file, const std::string& contents);

/// Opens a file for writing, creating parent directories. Throws fet::Error on failure.
std::ofstream open_output(const std::filesystem::path& file);

/// Lowercase hex SHA-256 of a byte string / of a file's contents.
std::string sha256_hex(const std::string& bytes);
std::string file_sha256_hex(const std::filesystem::path& file);

}  // namespace fet::io
