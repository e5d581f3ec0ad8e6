#include "io.hpp"

#include <sstream>
#include <system_error>

#include "rrpipe/error.hpp"

namespace rrpipe::io {

std::ifstream open_input(const std::filesystem::path& path, bool binary) {
  std::error_code ec;
  if (!std::filesystem::exists(path, ec) || std::filesystem::is_directory(path, ec)) throw MissingFile(path.string());
  std::ifstream in(path, binary ? std::ios::in | std::ios::binary : std::ios::in);
  if (!in) throw MissingFile(path.string());
  return in;
}

void for_each_line(const std::filesystem::path& path,
                   const std::function<void(std::size_t, std::string_view)>& fn) {
  auto in = open_input(path);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (!view.empty() && view.back() == '\r') view.remove_suffix(1);
    fn(line_no, view);
  }
}

void write_file_atomic(const std::filesystem::path& path, std::string_view contents) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::out | std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    if (!out) throw Error("short write to " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::string read_file(const std::filesystem::path& path) {
  auto in = open_input(path, true);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  constexpr std::string_view ws = " \t\r\n\f\v";
  auto first = s.find_first_not_of(ws);
  if (first == std::string_view::npos) return {};
  auto last = s.find_last_not_of(ws);
  return s.substr(first, last - first + 1);
}

nlohmann::json parse_record(std::size_t line_no, std::string_view line) {
  auto record = nlohmann::json::parse(line, nullptr, false);
  if (record.is_discarded()) throw MalformedRecord(line_no, "not valid JSON");
  if (!record.is_object()) throw MalformedRecord(line_no, "expected a JSON object");
  return record;
}

std::string string_field(const nlohmann::json& record, std::size_t line_no, const char* name,
                         bool allow_empty) {
  auto it = record.find(name);
  if (it == record.end()) throw MalformedRecord(line_no, std::string("missing field '") + name + "'");
  if (!it->is_string()) throw MalformedRecord(line_no, std::string("field '") + name + "' is not a string");
  auto value = it->get<std::string>();
  if (!allow_empty && value.empty())
    throw MalformedRecord(line_no, std::string("field '") + name + "' is empty");
  return value;
}

}  // namespace rrpipe::io
