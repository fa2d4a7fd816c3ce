#pragma once

// Output plumbing: FNV-1a hashes, CSV rows, binary array dumps, SVG plots,
// and an in-memory file collector that writes or verifies a run manifest.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"
#include "nldecay/error.hpp"
#include "nldecay/grid.hpp"

namespace nldecay {

inline constexpr const char* kVersion = "0.1.0";

inline std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

/// Shortest text that reads back to the same double.
inline std::string fmt(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

/// Comma-separated table with a mandatory header row and '\n' line endings.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

  CsvTable& row(const std::vector<std::string>& cells) {
    if (cells.size() != header_.size()) throw ArgumentError("csv: row width does not match header");
    rows_.push_back(cells);
    return *this;
  }

  std::string str() const {
    std::string out;
    auto line = [&out](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out += ',';
        out += cells[i];
      }
      out += '\n';
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return out;
  }

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

inline constexpr const char* kArrayMagic = "nldecay-array 1";

/// Magic line, one JSON header line, then the samples as raw native doubles.
inline std::string dump_array(const nlohmann::json& header, const std::vector<double>& samples) {
  nlohmann::json h = header;
  h["count"] = samples.size();
  std::string out = std::string(kArrayMagic) + "\n" + h.dump() + "\n";
  const auto* p = reinterpret_cast<const char*>(samples.data());
  out.append(p, p + samples.size() * sizeof(double));
  return out;
}

struct ArrayDump {
  nlohmann::json header;
  std::vector<double> samples;
};

inline ArrayDump load_array(const std::string& bytes) {
  const auto first = bytes.find('\n');
  if (first == std::string::npos || bytes.compare(0, first, kArrayMagic) != 0)
    throw DataError("array dump: missing magic line");
  const auto second = bytes.find('\n', first + 1);
  if (second == std::string::npos) throw DataError("array dump: missing header line");
  ArrayDump d;
  try {
    d.header = nlohmann::json::parse(bytes.substr(first + 1, second - first - 1));
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("array dump: bad header: ") + e.what());
  }
  const auto count = d.header.value("count", std::size_t{0});
  const std::size_t payload = bytes.size() - second - 1;
  if (payload != count * sizeof(double)) throw DataError("array dump: payload size does not match count");
  d.samples.resize(count);
  if (count) std::memcpy(d.samples.data(), bytes.data() + second + 1, payload);
  return d;
}

inline std::string read_file(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw ArgumentError("cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct PlotSeries {
  std::string label;
  std::vector<double> x, y;
  bool dashed = false;
};

/// Standalone SVG line plot in log-log axes (inputs must be positive).
inline std::string svg_loglog(const std::string& title, const std::vector<PlotSeries>& series,
                              const std::string& config_hash) {
  const double W = 640, H = 420, L = 70, R = 20, T = 40, B = 50;
  double x0 = INFINITY, x1 = -INFINITY, y0 = INFINITY, y1 = -INFINITY;
  for (const auto& s : series)
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      if (!(s.x[i] > 0 && s.y[i] > 0)) continue;
      x0 = std::min(x0, std::log10(s.x[i]));
      x1 = std::max(x1, std::log10(s.x[i]));
      y0 = std::min(y0, std::log10(s.y[i]));
      y1 = std::max(y1, std::log10(s.y[i]));
    }
  if (!(x1 > x0)) x1 = x0 + 1;
  if (!(y1 > y0)) y1 = y0 + 1;
  auto px = [&](double v) { return L + (std::log10(v) - x0) / (x1 - x0) * (W - L - R); };
  auto py = [&](double v) { return H - B - (std::log10(v) - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};

  std::ostringstream o;
  o << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
    << "<!-- config_hash " << config_hash << " -->\n"
    << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\">\n"
    << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"15\">" << title << "</text>\n"
    << "<rect x=\"" << L << "\" y=\"" << T << "\" width=\"" << W - L - R << "\" height=\"" << H - T - B
    << "\" fill=\"none\" stroke=\"black\"/>\n"
    << "<text x=\"" << W / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\" font-size=\"12\">log10 t</text>\n"
    << "<text x=\"16\" y=\"" << H / 2 << "\" font-size=\"12\" transform=\"rotate(-90 16," << H / 2
    << ")\" text-anchor=\"middle\">log10 norm</text>\n";
  for (int e = static_cast<int>(std::ceil(x0)); e <= static_cast<int>(std::floor(x1)); ++e)
    o << "<text x=\"" << px(std::pow(10.0, e)) << "\" y=\"" << H - B + 16 << "\" font-size=\"11\" text-anchor=\"middle\">"
      << e << "</text>\n";
  for (int e = static_cast<int>(std::ceil(y0)); e <= static_cast<int>(std::floor(y1)); ++e)
    o << "<text x=\"" << L - 6 << "\" y=\"" << py(std::pow(10.0, e)) + 4 << "\" font-size=\"11\" text-anchor=\"end\">"
      << e << "</text>\n";
  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    o << "<polyline fill=\"none\" stroke=\"" << colors[k % 6] << "\" stroke-width=\"1.5\""
      << (s.dashed ? " stroke-dasharray=\"6 4\"" : "") << " points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i)
      if (s.x[i] > 0 && s.y[i] > 0) o << fmt(px(s.x[i])) << ',' << fmt(py(s.y[i])) << ' ';
    o << "\"/>\n<text x=\"" << L + 10 << "\" y=\"" << T + 16 + 16 * static_cast<double>(k) << "\" font-size=\"12\" fill=\""
      << colors[k % 6] << "\">" << s.label << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

/// Collects output files in memory; then writes them plus a manifest, or checks them against an existing one.
class FileCollector {
 public:
  void add(const std::string& name, std::string content) { files_[name] = std::move(content); }
  const std::map<std::string, std::string>& files() const { return files_; }

  nlohmann::json file_list() const {
    nlohmann::json list = nlohmann::json::array();
    for (const auto& [name, content] : files_) list.push_back({{"name", name}, {"fnv1a64", hex64(fnv1a64(content))}});
    return list;
  }

  void write(const std::filesystem::path& dir, nlohmann::json manifest) const {
    std::filesystem::create_directories(dir);
    for (const auto& [name, content] : files_) {
      std::ofstream out(dir / name, std::ios::binary);
      if (!out) throw ArgumentError("cannot write " + (dir / name).string());
      out << content;
    }
    manifest["files"] = file_list();
    std::ofstream m(dir / "manifest.json", std::ios::binary);
    m << manifest.dump(2) << '\n';
  }

  /// Mismatches between the collected content and the manifest in dir (empty if identical).
  std::vector<std::string> check(const std::filesystem::path& dir) const {
    const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
    std::map<std::string, std::string> recorded;
    for (const auto& f : manifest.at("files")) recorded[f.at("name")] = f.at("fnv1a64");
    std::vector<std::string> bad;
    for (const auto& [name, content] : files_) {
      auto it = recorded.find(name);
      if (it == recorded.end())
        bad.push_back(name + ": not in manifest");
      else if (it->second != hex64(fnv1a64(content)))
        bad.push_back(name + ": hash differs");
    }
    for (const auto& [name, h] : recorded)
      if (!files_.count(name)) bad.push_back(name + ": listed but not produced");
    return bad;
  }
 private:
  std::map<std::string, std::string> files_;
};

/// Hashes of files on disk against their manifest entries.
inline std::vector<std::string> verify_manifest(const std::filesystem::path& dir) {
  const auto manifest = nlohmann::json::parse(read_file(dir / "manifest.json"));
  std::vector<std::string> bad;
  for (const auto& f : manifest.at("files")) {
    const std::string name = f.at("name");
    const auto path = dir / name;
    if (!std::filesystem::exists(path)) {
      bad.push_back(name + ": missing");
      continue;
    }
    if (hex64(fnv1a64(read_file(path))) != f.at("fnv1a64").get<std::string>()) bad.push_back(name + ": hash differs");
  }
  return bad;
}

}  // namespace nldecay
