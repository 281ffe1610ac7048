#include "allserp/ingest.hpp"

#include <fmt/format.h>

#include <charconv>
#include <fstream>
#include <sstream>

#include "allserp/csv.hpp"
#include "json.hpp"

namespace allserp {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IngestError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  if (in.bad()) throw IngestError("read failed: " + path.string());
  return ss.str();
}

void write_file(const fs::path& path, std::string_view data) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out.write(data.data(), static_cast<std::streamsize>(data.size()));
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t");
  return std::string(s.substr(b, e - b + 1));
}

std::int64_t parse_int(const std::string& raw, const fs::path& file) {
  const std::string s = trim(raw);
  std::int64_t v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return v;
  // Integral values written as 1200.0 are accepted.
  double d = 0;
  const auto [pd, ecd] = std::from_chars(s.data(), s.data() + s.size(), d);
  if (ecd == std::errc() && pd == s.data() + s.size() && d == static_cast<double>(
                                                               static_cast<std::int64_t>(d))) {
    return static_cast<std::int64_t>(d);
  }
  throw IngestError(fmt::format("{}: bad integer '{}'", file.string(), raw));
}

double parse_double(const std::string& raw, const fs::path& file) {
  const std::string s = trim(raw);
  double v = 0;
  const auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec == std::errc() && p == s.data() + s.size()) return v;
  throw IngestError(fmt::format("{}: bad number '{}'", file.string(), raw));
}

bool parse_bool(const std::string& raw, const fs::path& file) {
  const std::string s = trim(raw);
  if (s == "1" || s == "true" || s == "True" || s == "TRUE") return true;
  if (s == "0" || s == "false" || s == "False" || s == "FALSE" || s.empty()) return false;
  throw IngestError(fmt::format("{}: bad boolean '{}'", file.string(), raw));
}

// Rows of an optional CSV with the named columns resolved; empty when the
// file does not exist.
struct Columns {
  csv::Table table;
  std::vector<std::size_t> idx;
};

std::optional<Columns> open_csv(const fs::path& path, std::initializer_list<const char*> names) {
  if (!fs::exists(path)) return std::nullopt;
  Columns c;
  try {
    c.table = csv::read_table(path);
    if (c.table.header.empty()) return c;
    for (const char* n : names) c.idx.push_back(c.table.column(n));
  } catch (const std::exception& e) {
    throw IngestError(fmt::format("{}: {}", path.string(), e.what()));
  }
  for (const auto& row : c.table.rows) {
    if (row.size() != c.table.header.size()) {
      throw IngestError(fmt::format("{}: ragged row", path.string()));
    }
  }
  return c;
}

TrialMeta parse_meta(const fs::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
    TrialMeta m;
    const json& id = j.at("trial_id");
    m.trial_id = id.is_string() ? id.get<std::string>() : id.dump();
    m.viewport_width = j.at("viewport_width").get<int>();
    m.viewport_height = j.at("viewport_height").get<int>();
    m.screenshot_width = j.at("screenshot_width").get<int>();
    m.screenshot_height = j.at("screenshot_height").get<int>();
    m.query_text = j.value("query_text", std::string());
    if (j.contains("entry_timestamp") && !j["entry_timestamp"].is_null()) {
      m.entry_timestamp = j["entry_timestamp"].get<std::int64_t>();
    }
    return m;
  } catch (const json::exception& e) {
    throw IngestError(fmt::format("{}: {}", path.string(), e.what()));
  }
}

std::string num(double v) { return fmt::format("{}", v); }

}  // namespace

TrialBundle load_trial_bundle(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IngestError("not a trial directory: " + dir.string());
  TrialBundle b;

  if (fs::exists(dir / "meta.json")) b.meta = parse_meta(dir / "meta.json");

  b.screenshot = read_png(dir / "screenshot.png");

  b.html = read_file(dir / "page.html");
  if (b.html.find('\0') != std::string::npos) {
    throw IngestError("page.html is not text: " + (dir / "page.html").string());
  }

  if (auto c = open_csv(dir / "ads.csv", {"etype", "x", "y", "w", "h"})) {
    const fs::path f = dir / "ads.csv";
    for (const auto& r : c->table.rows) {
      const auto e = etype_from_string(trim(r[c->idx[0]]));
      if (!e) throw IngestError(fmt::format("{}: unknown etype '{}'", f.string(), r[c->idx[0]]));
      AdRect a;
      a.etype = *e;
      a.box = {static_cast<int>(parse_int(r[c->idx[1]], f)),
               static_cast<int>(parse_int(r[c->idx[2]], f)),
               static_cast<int>(parse_int(r[c->idx[3]], f)),
               static_cast<int>(parse_int(r[c->idx[4]], f))};
      b.ad_rects.push_back(a);
    }
  }
  if (auto c = open_csv(dir / "fixations.csv", {"x", "y", "start", "end"})) {
    const fs::path f = dir / "fixations.csv";
    for (const auto& r : c->table.rows) {
      b.fixations.push_back({parse_double(r[c->idx[0]], f), parse_double(r[c->idx[1]], f),
                             parse_int(r[c->idx[2]], f), parse_int(r[c->idx[3]], f)});
    }
  }
  if (auto c = open_csv(dir / "clicks.csv", {"t", "x", "y", "is_final"})) {
    const fs::path f = dir / "clicks.csv";
    for (const auto& r : c->table.rows) {
      b.clicks.push_back({parse_int(r[c->idx[0]], f), parse_double(r[c->idx[1]], f),
                          parse_double(r[c->idx[2]], f), parse_bool(r[c->idx[3]], f)});
    }
  }
  if (auto c = open_csv(dir / "cursor.csv", {"t", "x", "y", "kind"})) {
    const fs::path f = dir / "cursor.csv";
    for (const auto& r : c->table.rows) {
      const auto k = cursor_kind_from_string(trim(r[c->idx[3]]));
      if (!k) throw IngestError(fmt::format("{}: unknown kind '{}'", f.string(), r[c->idx[3]]));
      b.cursor.push_back({parse_int(r[c->idx[0]], f), parse_double(r[c->idx[1]], f),
                          parse_double(r[c->idx[2]], f), *k});
    }
  }
  return b;
}

void write_trial_bundle(const fs::path& dir, const TrialBundle& b) {
  fs::create_directories(dir);
  if (b.meta) {
    json j = json::object();
    j["trial_id"] = b.meta->trial_id;
    j["viewport_width"] = b.meta->viewport_width;
    j["viewport_height"] = b.meta->viewport_height;
    j["screenshot_width"] = b.meta->screenshot_width;
    j["screenshot_height"] = b.meta->screenshot_height;
    j["query_text"] = b.meta->query_text;
    if (b.meta->entry_timestamp) j["entry_timestamp"] = *b.meta->entry_timestamp;
    write_file(dir / "meta.json", j.dump(2) + "\n");
  }
  write_png(dir / "screenshot.png", b.screenshot);
  write_file(dir / "page.html", b.html);

  std::string ads = csv::format_row({"etype", "x", "y", "w", "h"});
  for (const AdRect& a : b.ad_rects) {
    ads += csv::format_row({std::string(to_string(a.etype)), std::to_string(a.box.x),
                            std::to_string(a.box.y), std::to_string(a.box.w),
                            std::to_string(a.box.h)});
  }
  write_file(dir / "ads.csv", ads);

  std::string fix = csv::format_row({"x", "y", "start", "end"});
  for (const FixationEvent& f : b.fixations) {
    fix += csv::format_row({num(f.x), num(f.y), std::to_string(f.start), std::to_string(f.end)});
  }
  write_file(dir / "fixations.csv", fix);

  std::string clicks = csv::format_row({"t", "x", "y", "is_final"});
  for (const ClickEvent& c : b.clicks) {
    clicks += csv::format_row({std::to_string(c.t), num(c.x), num(c.y), c.is_final ? "1" : "0"});
  }
  write_file(dir / "clicks.csv", clicks);

  std::string cursor = csv::format_row({"t", "x", "y", "kind"});
  for (const CursorEvent& c : b.cursor) {
    cursor += csv::format_row(
        {std::to_string(c.t), num(c.x), num(c.y), std::string(to_string(c.kind))});
  }
  write_file(dir / "cursor.csv", cursor);
}

}  // namespace allserp
