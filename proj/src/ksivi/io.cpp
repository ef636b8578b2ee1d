#include "ksivi/io.hpp"

#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <vector>

#include "json.hpp"

#include "ksivi/error.hpp"

namespace ksivi {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint payload assumes a little-endian host");

namespace {

std::string format_double(double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

bool parse_cell(const std::string& s, double& out) {
  const char* b = s.data();
  const char* e = s.data() + s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(*b))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
  if (b < e && *b == '+') ++b;
  auto res = std::from_chars(b, e, out);
  return res.ec == std::errc() && res.ptr == e;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) cells.push_back(cell);
  return cells;
}

}  // namespace

void write_samples_csv(const std::filesystem::path& path, const Eigen::Ref<const Eigen::MatrixXd>& points) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  for (Eigen::Index j = 0; j < points.cols(); ++j) {
    for (Eigen::Index i = 0; i < points.rows(); ++i) {
      if (i) out << ',';
      out << format_double(points(i, j));
    }
    out << '\n';
  }
  if (!out) throw IoError("failed writing " + path.string());
}

SampleSet read_samples_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open samples " + path.string());
  std::vector<std::vector<double>> rows;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    const auto cells = split(line);
    std::vector<double> row(cells.size());
    bool ok = true;
    for (std::size_t i = 0; i < cells.size() && ok; ++i) ok = parse_cell(cells[i], row[i]);
    if (!ok) {
      if (line_no == 1 && rows.empty()) continue;  // header row
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": non-numeric cell");
    }
    if (!rows.empty() && row.size() != rows.front().size())
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": ragged row");
    rows.push_back(std::move(row));
  }
  if (rows.empty()) throw IoError("samples file " + path.string() + " is empty");
  SampleSet s;
  s.label = path.filename().string();
  s.points.resize(static_cast<Eigen::Index>(rows.front().size()), static_cast<Eigen::Index>(rows.size()));
  for (std::size_t j = 0; j < rows.size(); ++j)
    for (std::size_t i = 0; i < rows[j].size(); ++i)
      s.points(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[j][i];
  return s;
}

void write_trace_csv(const std::filesystem::path& path, const LossTrace& trace) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,ksd2,bandwidth,beta_temp,grad_norm,wallclock_ms\n";
  for (const auto& r : trace)
    out << r.iteration << ',' << format_double(r.ksd2) << ',' << format_double(r.bandwidth) << ','
        << format_double(r.beta_temp) << ',' << format_double(r.grad_norm) << ',' << format_double(r.wallclock_ms)
        << '\n';
}

LossTrace read_trace_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open trace " + path.string());
  LossTrace trace;
  std::string line;
  std::getline(in, line);  // header
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line);
    if (cells.size() != 6) throw IoError("trace row with " + std::to_string(cells.size()) + " cells");
    double v[6];
    for (int i = 0; i < 6; ++i)
      if (!parse_cell(cells[static_cast<std::size_t>(i)], v[i])) throw IoError("non-numeric trace cell");
    trace.push_back({static_cast<std::int64_t>(v[0]), v[1], v[2], v[3], v[4], v[5]});
  }
  return trace;
}

void write_diagnostics_csv(const std::filesystem::path& path, const std::vector<SmoothnessSummary>& diags) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << "iteration,jacobian_norm_mean,jacobian_norm_max,jacobian_norm_min,n_probes\n";
  for (const auto& d : diags)
    out << d.iteration << ',' << format_double(d.mean) << ',' << format_double(d.max) << ',' << format_double(d.min)
        << ',' << d.n_probes << '\n';
}

namespace {

void write_blob(const std::filesystem::path& path, const NetArch& arch, const Eigen::VectorXd& net_flat,
                const Eigen::VectorXd& rho, const std::string& kind) {
  json header = {{"format", "ksivi-params"},
                 {"version", 1},
                 {"kind", kind},
                 {"widths", arch.widths},
                 {"n_net_params", net_flat.size()},
                 {"n_rho", rho.size()},
                 {"encoding", "float64-le"},
                 {"layout", "network layer-major (weights row-major, then biases), then rho"}};
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << header.dump() << '\n';
  out.write(reinterpret_cast<const char*>(net_flat.data()), static_cast<std::streamsize>(net_flat.size() * 8));
  out.write(reinterpret_cast<const char*>(rho.data()), static_cast<std::streamsize>(rho.size() * 8));
  if (!out) throw IoError("failed writing " + path.string());
}

struct Blob {
  NetArch arch;
  Eigen::VectorXd net_flat;
  Eigen::VectorXd rho;
};

Blob read_blob(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::string header_line;
  std::getline(in, header_line);
  json header;
  try {
    header = json::parse(header_line);
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  Blob blob;
  try {
    if (header.at("format") != "ksivi-params" || header.at("encoding") != "float64-le")
      throw IoError("unsupported checkpoint format in " + path.string());
    blob.arch.widths = header.at("widths").get<std::vector<int>>();
    blob.arch.validate();
    const auto n_net = header.at("n_net_params").get<Eigen::Index>();
    const auto n_rho = header.at("n_rho").get<Eigen::Index>();
    if (n_net != blob.arch.n_params()) throw IoError("checkpoint parameter count does not match its widths");
    blob.net_flat.resize(n_net);
    blob.rho.resize(n_rho);
  } catch (const json::exception& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  } catch (const DimensionError& e) {
    throw IoError("corrupt checkpoint header in " + path.string() + ": " + e.what());
  }
  in.read(reinterpret_cast<char*>(blob.net_flat.data()), static_cast<std::streamsize>(blob.net_flat.size() * 8));
  in.read(reinterpret_cast<char*>(blob.rho.data()), static_cast<std::streamsize>(blob.rho.size() * 8));
  if (!in) throw IoError("checkpoint payload truncated in " + path.string());
  in.peek();
  if (!in.eof()) throw IoError("checkpoint has trailing bytes in " + path.string());
  return blob;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const SIVParams& params) {
  params.validate();
  write_blob(path, params.net.arch, params.net.flatten(), params.rho, "siv");
}

SIVParams load_checkpoint(const std::filesystem::path& path) {
  Blob blob = read_blob(path);
  SIVParams p{NetParams::from_flat(blob.arch, blob.net_flat), blob.rho};
  try {
    p.validate();
  } catch (const DimensionError& e) {
    throw IoError("corrupt checkpoint " + path.string() + ": " + e.what());
  }
  return p;
}

void save_net(const std::filesystem::path& path, const NetParams& net) {
  write_blob(path, net.arch, net.flatten(), Eigen::VectorXd(), "net");
}

NetParams load_net(const std::filesystem::path& path) {
  Blob blob = read_blob(path);
  return NetParams::from_flat(blob.arch, blob.net_flat);
}

}  // namespace ksivi
