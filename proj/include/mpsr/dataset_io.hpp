/**
 * @file dataset_io.hpp
 * @brief On-disk dataset: `manifest.json` plus one CSV per impact.
 *
 * manifest.json (format_version 1):
 *   { "format_version": 1,
 *     "impacts": [ { "impact_id", "dataset_tag", "injury_label" (bool|null),
 *                    "dt_seconds", "n_elements", "n_steps", "mode" ("F"|"ED"),
 *                    "data_path" (relative to the manifest) } ] }
 *
 * Data files have a header row and n_elements * n_steps rows ordered by
 * element then step:
 *   F : element_id,step,f11,f12,f13,f21,f22,f23,f31,f32,f33
 *   ED: element_id,step,e11,e22,e33,e12,e13,e23,d11,d22,d33,d12,d13,d23
 * Reals are written with 17 significant digits so reading back is exact.
 */
#pragma once

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "mpsr/aggregation.hpp"
#include "mpsr/error.hpp"
#include "mpsr/strain_metrics.hpp"

namespace mpsr {

inline constexpr int kFormatVersion = 1;
inline constexpr std::string_view kManifestName = "manifest.json";
inline constexpr std::string_view kHeaderF = "element_id,step,f11,f12,f13,f21,f22,f23,f31,f32,f33";
inline constexpr std::string_view kHeaderED =
    "element_id,step,e11,e22,e33,e12,e13,e23,d11,d22,d33,d12,d13,d23";

/// Shortest-safe lossless text form: 17 significant digits, general notation.
inline std::string format_real(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

inline std::string read_text_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::filesystem::path& p, std::string_view text) {
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + p.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) fail(ErrorKind::Io, "write failed for " + p.string());
}

namespace detail {

inline bool safe_file_stem(std::string_view id) {
  if (id.empty() || id == "." || id == "..") return false;
  for (char c : id)
    if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
  return true;
}

inline std::vector<std::string_view> split_csv(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    auto field = line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) field.remove_prefix(1);
    while (!field.empty() && (field.back() == ' ' || field.back() == '\t' || field.back() == '\r'))
      field.remove_suffix(1);
    out.push_back(field);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(start, nl - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    start = nl + 1;
  }
  while (!lines.empty() && lines.back().empty()) lines.pop_back();
  return lines;
}

struct CsvContext {
  std::string file;
  std::size_t line = 0;

  [[noreturn]] void error(ErrorKind kind, const std::string& what) const {
    fail(kind, file + ":" + std::to_string(line) + ": " + what);
  }
};

inline double parse_real(std::string_view s, const CsvContext& ctx) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    ctx.error(ErrorKind::ParseError, "not a number: '" + std::string(s) + "'");
  if (!std::isfinite(v)) ctx.error(ErrorKind::InvalidValue, "non-finite value '" + std::string(s) + "'");
  return v;
}

inline std::int64_t parse_int(std::string_view s, const CsvContext& ctx) {
  std::int64_t v = 0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    ctx.error(ErrorKind::ParseError, "not an integer: '" + std::string(s) + "'");
  return v;
}

inline std::string impact_csv(const ImpactRecord& r) {
  const bool kinematic = r.elements.front().mode == HistoryMode::Kinematic;
  std::string out(kinematic ? kHeaderF : kHeaderED);
  out += '\n';
  for (const auto& e : r.elements) {
    for (std::size_t k = 0; k < e.steps(); ++k) {
      out += std::to_string(e.element_id);
      out += ',';
      out += std::to_string(k);
      auto put = [&](double v) {
        out += ',';
        out += format_real(v);
      };
      if (kinematic) {
        for (double v : e.deformation[k].components()) put(v);
      } else {
        for (double v : e.strain[k].components()) put(v);
        for (double v : e.rate[k].components()) put(v);
      }
      out += '\n';
    }
  }
  return out;
}

}  // namespace detail

/// Writes manifest.json and one CSV per impact into `directory` (created if
/// missing). Identical records give identical bytes.
inline std::filesystem::path write_dataset(std::span<const ImpactRecord> records,
                                           const std::filesystem::path& directory) {
  std::error_code ec;
  std::filesystem::create_directories(directory, ec);
  if (ec) fail(ErrorKind::Io, "cannot create " + directory.string() + ": " + ec.message());

  nlohmann::ordered_json impacts = nlohmann::ordered_json::array();
  std::set<std::string> seen;
  for (const auto& r : records) {
    r.validate();
    if (!detail::safe_file_stem(r.impact_id))
      fail(ErrorKind::InvalidValue, "impact id '" + r.impact_id + "' is not usable as a file name");
    if (!seen.insert(r.impact_id).second) fail(ErrorKind::InvalidValue, "duplicate impact id " + r.impact_id);
    const auto& first = r.elements.front();
    for (const auto& e : r.elements) {
      e.validate();
      if (e.mode != first.mode || e.steps() != first.steps())
        fail(ErrorKind::InvalidValue, "impact " + r.impact_id + ": elements disagree on mode or length");
    }
    const std::string data_path = r.impact_id + ".csv";
    write_text_file(directory / data_path, detail::impact_csv(r));

    nlohmann::ordered_json j;
    j["impact_id"] = r.impact_id;
    j["dataset_tag"] = r.dataset_tag;
    j["injury_label"] = r.injury_label ? nlohmann::ordered_json(*r.injury_label) : nlohmann::ordered_json();
    j["dt_seconds"] = first.dt;
    j["n_elements"] = r.elements.size();
    j["n_steps"] = first.steps();
    j["mode"] = first.mode == HistoryMode::Kinematic ? "F" : "ED";
    j["data_path"] = data_path;
    impacts.push_back(std::move(j));
  }
  nlohmann::ordered_json manifest;
  manifest["format_version"] = kFormatVersion;
  manifest["impacts"] = std::move(impacts);
  const auto path = directory / kManifestName;
  write_text_file(path, manifest.dump(2) + "\n");
  return path;
}

namespace detail {

struct ManifestEntry {
  std::string impact_id;
  std::string dataset_tag;
  std::optional<bool> injury_label;
  double dt = 0.0;
  std::size_t n_elements = 0;
  std::size_t n_steps = 0;
  HistoryMode mode = HistoryMode::Kinematic;
  std::string data_path;
};

inline ManifestEntry parse_manifest_entry(const nlohmann::json& j, const std::string& where) {
  auto bad = [&](const std::string& what) { fail(ErrorKind::ParseError, where + ": " + what); };
  if (!j.is_object()) bad("impact entry is not an object");
  for (const char* key : {"impact_id", "dataset_tag", "dt_seconds", "n_elements", "n_steps", "mode", "data_path"})
    if (!j.contains(key)) bad(std::string("missing field '") + key + "'");
  ManifestEntry e;
  try {
    e.impact_id = j.at("impact_id").get<std::string>();
    e.dataset_tag = j.at("dataset_tag").get<std::string>();
    if (j.contains("injury_label") && !j.at("injury_label").is_null())
      e.injury_label = j.at("injury_label").get<bool>();
    e.dt = j.at("dt_seconds").get<double>();
    if (!j.at("n_elements").is_number_unsigned() || !j.at("n_steps").is_number_unsigned())
      bad("n_elements and n_steps must be non-negative integers");
    e.n_elements = j.at("n_elements").get<std::size_t>();
    e.n_steps = j.at("n_steps").get<std::size_t>();
    const auto mode = j.at("mode").get<std::string>();
    if (mode == "F") e.mode = HistoryMode::Kinematic;
    else if (mode == "ED") e.mode = HistoryMode::FeExport;
    else bad("mode must be \"F\" or \"ED\", got \"" + mode + "\"");
    e.data_path = j.at("data_path").get<std::string>();
  } catch (const nlohmann::json::exception& ex) {
    bad(std::string("bad field type: ") + ex.what());
  }
  const std::string id = where + " (impact " + e.impact_id + ")";
  if (!(e.dt > 0.0) || !std::isfinite(e.dt)) fail(ErrorKind::InvalidValue, id + ": dt_seconds must be > 0");
  if (e.n_steps < kStencilPoints)
    fail(ErrorKind::SeriesTooShort, id + ": n_steps = " + std::to_string(e.n_steps) + " (need >= 5)");
  if (e.n_elements < 1) fail(ErrorKind::EmptyCollection, id + ": n_elements must be >= 1");
  return e;
}

inline ImpactRecord read_impact(const ManifestEntry& m, const std::filesystem::path& base) {
  const auto path = base / m.data_path;
  const std::string text = read_text_file(path);
  const auto lines = split_lines(text);
  CsvContext ctx{path.string(), 1};

  const bool kinematic = m.mode == HistoryMode::Kinematic;
  const std::string_view header = kinematic ? kHeaderF : kHeaderED;
  if (lines.empty()) ctx.error(ErrorKind::ParseError, "empty data file for impact " + m.impact_id);
  {
    std::string h;
    for (auto f : split_csv(lines[0])) {
      if (!h.empty()) h += ',';
      h += f;
    }
    if (h != header) ctx.error(ErrorKind::ParseError, "expected header '" + std::string(header) + "'");
  }
  const std::size_t expected_rows = m.n_elements * m.n_steps;
  if (lines.size() - 1 != expected_rows)
    fail(ErrorKind::RowCountMismatch, path.string() + ": impact " + m.impact_id + " has " +
                                          std::to_string(lines.size() - 1) + " data rows, manifest implies " +
                                          std::to_string(expected_rows));

  const std::size_t columns = kinematic ? 11 : 14;
  ImpactRecord r{m.impact_id, m.dataset_tag, m.injury_label, {}};
  r.elements.reserve(m.n_elements);
  std::set<std::int64_t> ids;
  for (std::size_t e = 0; e < m.n_elements; ++e) {
    std::vector<Tensor3> f;
    std::vector<SymTensor3> es, ds;
    std::int64_t element_id = 0;
    for (std::size_t k = 0; k < m.n_steps; ++k) {
      ctx.line = 2 + e * m.n_steps + k;
      const auto fields = split_csv(lines[ctx.line - 1]);
      if (fields.size() != columns)
        ctx.error(ErrorKind::ParseError, "expected " + std::to_string(columns) + " columns, got " +
                                             std::to_string(fields.size()));
      const auto id = parse_int(fields[0], ctx);
      const auto step = parse_int(fields[1], ctx);
      if (k == 0) {
        element_id = id;
        if (!ids.insert(id).second) ctx.error(ErrorKind::InvalidValue, "duplicate element id " + std::to_string(id));
      } else if (id != element_id) {
        ctx.error(ErrorKind::RowCountMismatch, "element " + std::to_string(element_id) + " of impact " +
                                                   m.impact_id + " ends after " + std::to_string(k) + " steps");
      }
      if (step != static_cast<std::int64_t>(k))
        ctx.error(ErrorKind::ParseError, "expected step " + std::to_string(k) + ", got " + std::to_string(step));
      if (kinematic) {
        std::array<double, 9> c{};
        for (int i = 0; i < 9; ++i) c[i] = parse_real(fields[2 + i], ctx);
        Tensor3 t(c);
        if (!(t.determinant() > 0.0)) ctx.error(ErrorKind::SingularDeformation, "det(F) <= 0");
        f.push_back(t);
      } else {
        std::array<double, 6> ce{}, cd{};
        for (int i = 0; i < 6; ++i) ce[i] = parse_real(fields[2 + i], ctx);
        for (int i = 0; i < 6; ++i) cd[i] = parse_real(fields[8 + i], ctx);
        es.emplace_back(ce);
        ds.emplace_back(cd);
      }
    }
    r.elements.push_back(kinematic ? ElementHistory::kinematic(element_id, m.dt, std::move(f))
                                   : ElementHistory::fe_export(element_id, m.dt, std::move(es), std::move(ds)));
  }
  return r;
}

}  // namespace detail

/// Reads and validates a dataset, returning records in manifest order.
inline std::vector<ImpactRecord> read_dataset(const std::filesystem::path& manifest_path) {
  const std::string text = read_text_file(manifest_path);
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& ex) {
    fail(ErrorKind::ParseError, manifest_path.string() + ": " + ex.what());
  }
  const std::string where = manifest_path.string();
  if (!manifest.is_object() || !manifest.contains("format_version") || !manifest.contains("impacts"))
    fail(ErrorKind::ParseError, where + ": manifest needs 'format_version' and 'impacts'");
  if (!manifest["format_version"].is_number_integer() || manifest["format_version"].get<int>() != kFormatVersion)
    fail(ErrorKind::VersionMismatch, where + ": unsupported format_version " + manifest["format_version"].dump() +
                                         " (expected " + std::to_string(kFormatVersion) + ")");
  if (!manifest["impacts"].is_array()) fail(ErrorKind::ParseError, where + ": 'impacts' is not an array");

  const auto base = manifest_path.parent_path();
  std::vector<ImpactRecord> out;
  std::set<std::string> seen;
  std::size_t index = 0;
  for (const auto& j : manifest["impacts"]) {
    const auto entry = detail::parse_manifest_entry(j, where + ": impacts[" + std::to_string(index++) + "]");
    if (!seen.insert(entry.impact_id).second)
      fail(ErrorKind::InvalidValue, where + ": duplicate impact id " + entry.impact_id);
    out.push_back(detail::read_impact(entry, base));
  }
  return out;
}

}  // namespace mpsr
