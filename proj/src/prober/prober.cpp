#include "prober/prober.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <string>

#include "common/error.hpp"

namespace contoursel::probe {

namespace {

constexpr std::uint64_t kSliceTag = 0x51ce;

double gridCoordinate(const Window& w, int axis, int index, int r) {
  return w.lo[axis] + static_cast<double>(index) * w.side[axis] / static_cast<double>(r - 1);
}

void checkResolution(int r) {
  if (r < 2) fail(ErrorCode::invalid_argument, "resolution must be >= 2, got " + std::to_string(r));
}

void recordRange(ScalarField& f) {
  const auto [lo, hi] = std::minmax_element(f.values.begin(), f.values.end());
  f.raw_min = *lo;
  f.raw_max = *hi;
}

ScalarField finishView(ScalarField raw, const ProbeParams& params) {
  auto f = quantize_levels(normalize(std::move(raw)), params.levels);
  if (params.r_out == f.resolution) return f;
  return resize_bilinear(f, params.r_out);
}

void putU32(std::ostream& out, std::uint32_t v) {
  unsigned char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 4);
}

void putU64(std::ostream& out, std::uint64_t v) {
  unsigned char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<unsigned char>(v >> (8 * i));
  out.write(reinterpret_cast<const char*>(b), 8);
}

std::uint64_t getU64(std::istream& in) {
  unsigned char b[8];
  if (!in.read(reinterpret_cast<char*>(b), 8)) fail(ErrorCode::parse, "truncated stack file");
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

std::uint32_t getU32(std::istream& in) {
  unsigned char b[4];
  if (!in.read(reinterpret_cast<char*>(b), 4)) fail(ErrorCode::parse, "truncated stack file");
  std::uint32_t v = 0;
  for (int i = 3; i >= 0; --i) v = (v << 8) | b[i];
  return v;
}

void putDouble(std::ostream& out, double v) { putU64(out, std::bit_cast<std::uint64_t>(v)); }
double getDouble(std::istream& in) { return std::bit_cast<double>(getU64(in)); }

nlohmann::json windowJson(const Window& w) {
  return {{"lo", {w.lo[0], w.lo[1]}}, {"side", {w.side[0], w.side[1]}}};
}

}  // namespace

SlicePlan plan_slice(int dimension, Rng& rng) {
  if (dimension < 2) fail(ErrorCode::invalid_argument, "slicing needs d >= 2");
  if (dimension == 2) return {0, 1, 0.0};
  // Enumerate unordered pairs in lexicographic order and pick one uniformly.
  const auto pairs = static_cast<std::uint64_t>(dimension) * (dimension - 1) / 2;
  auto k = rng.below(pairs);
  for (int i = 0; i < dimension; ++i) {
    const auto row = static_cast<std::uint64_t>(dimension - 1 - i);
    if (k < row) return {i, i + 1 + static_cast<int>(k), 0.0};
    k -= row;
  }
  fail(ErrorCode::internal, "slice enumeration overflow");
}

ScalarField probe_grid(const suite::ProblemInstance& inst, const SlicePlan& plan, int r,
                       const Window& window, std::int64_t& evaluations) {
  checkResolution(r);
  const int d = inst.dimension();
  if (plan.axis_i == plan.axis_j || plan.axis_i < 0 || plan.axis_j < 0 || plan.axis_i >= d ||
      plan.axis_j >= d)
    fail(ErrorCode::invalid_argument, "slice axes out of range");
  ScalarField field(r);
  std::vector<double> x(static_cast<std::size_t>(d), plan.fixed_value);
  std::vector<double> cols(static_cast<std::size_t>(r));
  for (int a = 0; a < r; ++a) cols[a] = gridCoordinate(window, 0, a, r);
  for (int b = 0; b < r; ++b) {
    x[plan.axis_j] = gridCoordinate(window, 1, b, r);
    for (int a = 0; a < r; ++a) {
      x[plan.axis_i] = cols[a];
      field.at(b, a) = inst.evaluate_soo(x);
    }
  }
  evaluations += static_cast<std::int64_t>(r) * r;
  recordRange(field);
  return field;
}

std::pair<ScalarField, ScalarField> probe_grid_moo(const suite::ProblemInstance& inst, int r,
                                                   const Window& window,
                                                   std::int64_t& evaluations) {
  checkResolution(r);
  ScalarField f1(r), f2(r);
  std::array<double, 2> x{};
  for (int b = 0; b < r; ++b) {
    x[1] = gridCoordinate(window, 1, b, r);
    for (int a = 0; a < r; ++a) {
      x[0] = gridCoordinate(window, 0, a, r);
      const auto [v1, v2] = inst.evaluate_moo(x);
      f1.at(b, a) = v1;
      f2.at(b, a) = v2;
    }
  }
  evaluations += static_cast<std::int64_t>(r) * r;
  recordRange(f1);
  recordRange(f2);
  return {std::move(f1), std::move(f2)};
}

ScalarField normalize(ScalarField field) {
  if (field.values.empty()) return field;
  for (double v : field.values)
    if (!std::isfinite(v)) fail(ErrorCode::data, "non-finite value in field");
  const auto [lo_it, hi_it] = std::minmax_element(field.values.begin(), field.values.end());
  const double lo = *lo_it, hi = *hi_it;
  field.raw_min = lo;
  field.raw_max = hi;
  if (hi == lo) {
    std::fill(field.values.begin(), field.values.end(), 0.5);
    return field;
  }
  const double span = hi - lo;
  for (double& v : field.values) v = (v - lo) / span;
  return field;
}

ScalarField quantize_levels(ScalarField field, int levels) {
  if (levels < 0) fail(ErrorCode::invalid_argument, "level count must be >= 0");
  if (levels == 0) return field;
  const double n = static_cast<double>(levels);
  for (double& v : field.values) v = (std::floor(std::min(v, 1.0 - 1e-12) * n) + 0.5) / n;
  return field;
}

ScalarField resize_bilinear(const ScalarField& field, int r_out) {
  checkResolution(r_out);
  const int r_in = field.resolution;
  if (r_out == r_in) return field;
  ScalarField out(r_out);
  out.raw_min = field.raw_min;
  out.raw_max = field.raw_max;
  const double scale = static_cast<double>(r_in - 1) / static_cast<double>(r_out - 1);
  // Source coordinates and blend weights per output index; same for rows and cols.
  std::vector<int> idx(static_cast<std::size_t>(r_out));
  std::vector<double> frac(static_cast<std::size_t>(r_out));
  for (int a = 0; a < r_out; ++a) {
    const double u = static_cast<double>(a) * scale;
    int i0 = static_cast<int>(std::floor(u));
    if (i0 >= r_in - 1) i0 = r_in - 2;
    idx[a] = i0;
    frac[a] = u - static_cast<double>(i0);
  }
  for (int b = 0; b < r_out; ++b) {
    const int y0 = idx[b];
    const double fy = frac[b];
    for (int a = 0; a < r_out; ++a) {
      const int x0 = idx[a];
      const double fx = frac[a];
      const double top = field.at(y0, x0) * (1.0 - fx) + field.at(y0, x0 + 1) * fx;
      const double bottom = field.at(y0 + 1, x0) * (1.0 - fx) + field.at(y0 + 1, x0 + 1) * fx;
      out.at(b, a) = top * (1.0 - fy) + bottom * fy;
    }
  }
  return out;
}

Window sample_window(const Domain& domain, double scale, Rng& rng) {
  if (!(scale > 0.0 && scale <= 1.0))
    fail(ErrorCode::invalid_argument, "window scale must lie in (0, 1]");
  Window w;
  for (int k = 0; k < 2; ++k) {
    const double extent = domain.hi[k] - domain.lo[k];
    w.side[k] = scale * extent;
    w.lo[k] = domain.lo[k] + rng.uniform() * (extent - w.side[k]);
  }
  return w;
}

ContourStack build_soo_stack(suite::FunctionCode function, int dimension,
                             std::span<const std::uint64_t> seeds, const ProbeParams& params) {
  if (seeds.size() != static_cast<std::size_t>(kViewCount))
    fail(ErrorCode::invalid_argument, "a stack needs exactly 5 instance seeds");
  ContourStack stack;
  for (int i = 0; i < kViewCount; ++i) {
    const auto inst = suite::make_instance(
        {suite::ProblemKind::soo, function, dimension, i}, seeds[static_cast<std::size_t>(i)]);
    Rng slice_rng(derive_seed(seeds[static_cast<std::size_t>(i)], {kSliceTag}));
    const auto plan = plan_slice(dimension, slice_rng);
    const auto window = Window::full_domain();
    auto raw = probe_grid(inst, plan, params.r_probe, window, stack.evaluations_spent);
    stack.views.push_back(finishView(std::move(raw), params));
    stack.sources.push_back({i, inst.seed(), plan, window});
  }
  return stack;
}

MooStackPair build_moo_stacks(const suite::ProblemInstance& inst, double scale, Rng& rng,
                              const ProbeParams& params) {
  if (inst.is_soo()) fail(ErrorCode::contract, "build_moo_stacks needs a bi-objective instance");
  MooStackPair pair;
  const Domain domain;
  std::int64_t evaluations = 0;
  for (int i = 0; i < kViewCount; ++i) {
    const auto window = sample_window(domain, scale, rng);
    auto [raw1, raw2] = probe_grid_moo(inst, params.r_probe, window, evaluations);
    const ViewSource source{inst.id().instance_index, inst.seed(), SlicePlan{}, window};
    pair.obj1.views.push_back(finishView(std::move(raw1), params));
    pair.obj2.views.push_back(finishView(std::move(raw2), params));
    pair.obj1.sources.push_back(source);
    pair.obj2.sources.push_back(source);
  }
  pair.obj1.evaluations_spent = evaluations;
  pair.obj2.evaluations_spent = evaluations;
  return pair;
}

void write_pgm(const ScalarField& field, const std::filesystem::path& path) {
  const int r = field.resolution;
  std::string bytes = "P5\n" + std::to_string(r) + " " + std::to_string(r) + "\n255\n";
  bytes.reserve(bytes.size() + field.values.size());
  // Image row 0 is the top edge, i.e. the largest second coordinate.
  for (int row = r - 1; row >= 0; --row) {
    for (int col = 0; col < r; ++col) {
      const double v = std::clamp(field.at(row, col), 0.0, 1.0);
      bytes.push_back(static_cast<char>(static_cast<unsigned char>(std::lround(v * 255.0))));
    }
  }
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

void write_stack(const ContourStack& stack, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) fail(ErrorCode::io, "cannot write " + path.string());
  out.write("CSTK", 4);
  putU32(out, 1);
  putU32(out, static_cast<std::uint32_t>(stack.view_count()));
  putU32(out, static_cast<std::uint32_t>(stack.resolution()));
  putU64(out, static_cast<std::uint64_t>(stack.evaluations_spent));
  for (std::size_t v = 0; v < stack.views.size(); ++v) {
    const auto& src = stack.sources[v];
    putU32(out, static_cast<std::uint32_t>(src.instance_index));
    putU64(out, src.seed);
    putU32(out, static_cast<std::uint32_t>(src.slice.axis_i));
    putU32(out, static_cast<std::uint32_t>(src.slice.axis_j));
    putDouble(out, src.slice.fixed_value);
    for (int k = 0; k < 2; ++k) putDouble(out, src.window.lo[k]);
    for (int k = 0; k < 2; ++k) putDouble(out, src.window.side[k]);
    const auto& f = stack.views[v];
    putDouble(out, f.raw_min);
    putDouble(out, f.raw_max);
    for (double x : f.values) putDouble(out, x);
  }
  if (!out) fail(ErrorCode::io, "write failed for " + path.string());
}

ContourStack read_stack(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorCode::io, "cannot open " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "CSTK", 4) != 0)
    fail(ErrorCode::parse, path.string() + ": not a stack file");
  if (getU32(in) != 1) fail(ErrorCode::parse, path.string() + ": unsupported stack version");
  const auto views = getU32(in);
  const auto r = static_cast<int>(getU32(in));
  if (views == 0 || views > 64 || r < 2 || r > 4096)
    fail(ErrorCode::parse, path.string() + ": implausible stack header");
  ContourStack stack;
  stack.evaluations_spent = static_cast<std::int64_t>(getU64(in));
  for (std::uint32_t v = 0; v < views; ++v) {
    ViewSource src;
    src.instance_index = static_cast<int>(getU32(in));
    src.seed = getU64(in);
    src.slice.axis_i = static_cast<int>(getU32(in));
    src.slice.axis_j = static_cast<int>(getU32(in));
    src.slice.fixed_value = getDouble(in);
    for (int k = 0; k < 2; ++k) src.window.lo[k] = getDouble(in);
    for (int k = 0; k < 2; ++k) src.window.side[k] = getDouble(in);
    ScalarField f(r);
    f.raw_min = getDouble(in);
    f.raw_max = getDouble(in);
    for (double& x : f.values) x = getDouble(in);
    stack.views.push_back(std::move(f));
    stack.sources.push_back(src);
  }
  return stack;
}

nlohmann::json sidecar(const ContourStack& stack, suite::FunctionCode function, int dimension,
                       const ProbeParams& params) {
  nlohmann::json seeds = nlohmann::json::array();
  nlohmann::json slices = nlohmann::json::array();
  nlohmann::json windows = nlohmann::json::array();
  for (const auto& src : stack.sources) {
    seeds.push_back(src.seed);
    slices.push_back({src.slice.axis_i, src.slice.axis_j});
    windows.push_back(windowJson(src.window));
  }
  return {{"config", {{"function", suite::to_string(function)}, {"dimension", dimension}}},
          {"seeds", seeds},
          {"slices", slices},
          {"windows", windows},
          {"r_probe", params.r_probe},
          {"r_out", params.r_out},
          {"L", params.levels},
          {"evaluations_spent", stack.evaluations_spent}};
}

}  // namespace contoursel::probe
