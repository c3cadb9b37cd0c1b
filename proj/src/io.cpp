#include "fet/io.hpp"

#include <openssl/evp.h>

#include <array>
#include <fstream>
#include <memory>
#include <sstream>

#include "fet/error.hpp"

namespace fet::io {

void read_jsonl(std::istream& in, const std::function<void(const Json&, std::size_t)>& on_record) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json record;
    try {
      record = Json::parse(line);
    } catch (const Json::parse_error& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
    if (!record.is_object()) {
      throw ParseError("line " + std::to_string(line_no) + ": record is not an object");
    }
    try {
      on_record(record, line_no);
    } catch (const Json::exception& e) {
      throw ParseError("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
}

void read_jsonl_file(const std::filesystem::path& file,
                     const std::function<void(const Json&, std::size_t)>& on_record) {
  std::ifstream in(file);
  if (!in) throw Error("cannot open " + file.string());
  try {
    read_jsonl(in, on_record);
  } catch (const ParseError& e) {
    throw ParseError(file.string() + ": " + e.what());
  }
}

void write_jsonl_record(std::ostream& out, const Json& record) { out << record.dump() << '\n'; }

std::string read_text_file(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) throw Error("cannot open " + file.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::ofstream open_output(const std::filesystem::path& file) {
  if (file.has_parent_path()) std::filesystem::create_directories(file.parent_path());
  std::ofstream out(file, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + file.string());
  return out;
}

void write_text_file(const std::filesystem::path& file, const std::string& contents) {
  auto out = open_output(file);
  out << contents;
}

std::string sha256_hex(const std::string& bytes) {
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), &EVP_MD_CTX_free);
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1 ||
      EVP_DigestUpdate(ctx.get(), bytes.data(), bytes.size()) != 1 ||
      EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error("sha256 failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0xf]);
  }
  return hex;
}

std::string file_sha256_hex(const std::filesystem::path& file) { return sha256_hex(read_text_file(file)); }

}  // namespace fet::io
