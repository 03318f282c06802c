#include "ibnet/io.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <fstream>
#include <iterator>
#include <ostream>
#include <sstream>

#include "ibnet/error.hpp"

namespace ibnet {

namespace {

std::vector<std::uint8_t> read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

std::optional<double> parse_double(std::string_view s) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

template <class T>
std::optional<T> parse_unsigned(std::string_view s) {
  s = trim(s);
  T v = 0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size() || s.empty()) return std::nullopt;
  return v;
}

}  // namespace

// ---- IDX ------------------------------------------------------------------

std::size_t IdxTensor::item_size() const {
  std::size_t n = 1;
  for (std::size_t i = 1; i < dims.size(); ++i) n *= dims[i];
  return n;
}

std::vector<double> IdxTensor::item(std::size_t i) const {
  const std::size_t n = item_size();
  if (i >= count()) throw ContractError("IDX item " + std::to_string(i) + " out of range");
  std::vector<double> v(n);
  for (std::size_t k = 0; k < n; ++k) v[k] = data[i * n + k] / 255.0;
  return v;
}

IdxTensor parse_idx(std::span<const std::uint8_t> bytes) {
  std::size_t pos = 0;
  auto u32 = [&]() {
    if (bytes.size() < pos + 4) throw FormatError("truncated IDX header", bytes.size());
    const std::uint32_t v = (std::uint32_t{bytes[pos]} << 24) | (std::uint32_t{bytes[pos + 1]} << 16) |
                            (std::uint32_t{bytes[pos + 2]} << 8) | std::uint32_t{bytes[pos + 3]};
    pos += 4;
    return v;
  };
  IdxTensor t;
  t.magic = u32();
  // Only unsigned-byte payloads (type code 0x08) with one or three dims.
  if (t.magic != 0x801 && t.magic != 0x803) throw FormatError("bad IDX magic", 0);
  const std::uint32_t rank = t.magic & 0xff;
  std::uint64_t total = 1;
  for (std::uint32_t d = 0; d < rank; ++d) {
    t.dims.push_back(u32());
    total *= t.dims.back();
  }
  if (bytes.size() - pos < total) throw FormatError("truncated IDX payload", bytes.size());
  if (bytes.size() - pos > total) throw FormatError("trailing bytes after IDX payload", pos + total);
  t.data.assign(bytes.begin() + static_cast<std::ptrdiff_t>(pos), bytes.end());
  return t;
}

IdxTensor load_idx(const std::string& path) { return parse_idx(read_file(path)); }

// ---- series -----------------------------------------------------------------

std::vector<double> parse_series_csv(std::string_view text) {
  std::vector<double> out;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    line = trim(line);
    if (line.empty()) continue;
    if (const auto v = parse_double(line)) {
      out.push_back(*v);
    } else if (line_no != 1) {
      throw FormatError("non-numeric series value '" + std::string(line) + "' on line", line_no);
    }
  }
  return out;
}

std::vector<double> load_series_csv(const std::string& path) {
  const auto bytes = read_file(path);
  return parse_series_csv({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

std::vector<double> logistic_series(std::size_t length, double r, double y0) {
  std::vector<double> out;
  out.reserve(length);
  double y = y0;
  for (std::size_t k = 0; k < length; ++k) {
    out.push_back(2.0 * y - 1.0);
    y = r * y * (1.0 - y);
  }
  return out;
}

// ---- configuration ----------------------------------------------------------

ConfigDocument parse_config_document(std::string_view text) {
  ConfigDocument doc;
  std::string section;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const auto nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(line_no) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw ConfigError(where + "empty section name");
      doc[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key(trim(line.substr(0, eq)));
    if (key.empty()) throw ConfigError(where + "empty key");
    auto& entries = doc[section];
    if (entries.contains(key)) throw ConfigError(where + "duplicate key " + section + "." + key);
    entries[key] = {std::string(trim(line.substr(eq + 1))), line_no};
  }
  return doc;
}

std::string_view to_string(Architecture a) {
  switch (a) {
    case Architecture::Percit: return "percit";
    case Architecture::Rbfit: return "rbfit";
    case Architecture::Rrbf: return "rrbf";
    case Architecture::Lstmit: return "lstmit";
    case Architecture::Convit: return "convit";
  }
  return "?";
}

namespace {

class ConfigReader {
 public:
  explicit ConfigReader(ConfigDocument doc) : doc_(std::move(doc)) {}

  const ConfigValue* find(const std::string& section, const std::string& key) {
    known_[section].push_back(key);
    auto s = doc_.find(section);
    if (s == doc_.end()) return nullptr;
    auto k = s->second.find(key);
    return k == s->second.end() ? nullptr : &k->second;
  }

  [[noreturn]] static void fail(const ConfigValue& v, const std::string& what) {
    throw ConfigError("line " + std::to_string(v.line) + ": " + what);
  }

  void real(const std::string& section, const std::string& key, double& out) {
    if (const auto* v = find(section, key)) {
      const auto d = parse_double(v->text);
      if (!d) fail(*v, section + "." + key + " expects a number");
      out = *d;
    }
  }

  template <class T>
  void count(const std::string& section, const std::string& key, T& out) {
    if (const auto* v = find(section, key)) {
      const auto d = parse_unsigned<T>(v->text);
      if (!d) fail(*v, section + "." + key + " expects a non-negative integer");
      out = *d;
    }
  }

  void text(const std::string& section, const std::string& key, std::string& out) {
    if (const auto* v = find(section, key)) out = v->text;
  }

  void flag(const std::string& section, const std::string& key, bool& out) {
    if (const auto* v = find(section, key)) {
      if (v->text == "true" || v->text == "1") {
        out = true;
      } else if (v->text == "false" || v->text == "0") {
        out = false;
      } else {
        fail(*v, section + "." + key + " expects true or false");
      }
    }
  }

  void list(const std::string& section, const std::string& key, std::vector<std::uint32_t>& out) {
    if (const auto* v = find(section, key)) {
      out.clear();
      std::string_view rest = v->text;
      while (true) {
        const auto comma = rest.find(',');
        const auto n = parse_unsigned<std::uint32_t>(rest.substr(0, comma));
        if (!n) fail(*v, section + "." + key + " expects a comma-separated list of integers");
        out.push_back(*n);
        if (comma == std::string_view::npos) break;
        rest = rest.substr(comma + 1);
      }
    }
  }

  void require(const std::string& section, const std::string& key) {
    if (find(section, key) == nullptr) throw ConfigError("missing required key " + section + "." + key);
  }

  // Rejects every entry no reader call asked for.
  void reject_unknown() const {
    for (const auto& [section, entries] : doc_) {
      const auto known = known_.find(section);
      for (const auto& [key, value] : entries) {
        const bool ok = known != known_.end() &&
                        std::find(known->second.begin(), known->second.end(), key) != known->second.end();
        if (!ok) fail(value, "unknown key " + section + "." + key);
      }
      if (entries.empty() && known == known_.end()) throw ConfigError("unknown section [" + section + "]");
    }
  }

 private:
  ConfigDocument doc_;
  std::map<std::string, std::vector<std::string>> known_;
};

}  // namespace

RunConfig parse_run_config(std::string_view text) {
  ConfigReader r(parse_config_document(text));
  RunConfig c;

  r.require("architecture", "kind");
  const ConfigValue& kind = *r.find("architecture", "kind");
  if (kind.text == "percit") {
    c.architecture = Architecture::Percit;
    r.require("architecture", "layers");
  } else if (kind.text == "rbfit") {
    c.architecture = Architecture::Rbfit;
    r.require("architecture", "n");
    r.require("architecture", "m");
  } else if (kind.text == "rrbf") {
    c.architecture = Architecture::Rrbf;
    r.require("architecture", "m");
  } else if (kind.text == "lstmit") {
    c.architecture = Architecture::Lstmit;
    r.require("architecture", "n");
    r.require("architecture", "m");
  } else if (kind.text == "convit") {
    c.architecture = Architecture::Convit;
    for (const char* k : {"l", "w", "f", "g"}) r.require("architecture", k);
  } else {
    ConfigReader::fail(kind, "unknown architecture '" + kind.text + "'");
  }
  r.count("architecture", "inputs", c.inputs);
  r.list("architecture", "layers", c.layers);
  r.count("architecture", "n", c.n);
  r.count("architecture", "m", c.m);
  r.count("architecture", "l", c.conv.l);
  r.count("architecture", "w", c.conv.w);
  r.count("architecture", "h", c.conv.h);
  r.count("architecture", "f", c.conv.f);
  r.count("architecture", "g", c.conv.g);
  r.count("architecture", "n1", c.conv.n1);
  r.count("architecture", "m3", c.conv.m3);
  r.flag("architecture", "adjustable", c.adjustable);

  NeuronParams& p = c.params;
  r.real("params", "omega_max", p.omega_max);
  r.real("params", "omega_min", p.omega_min);
  r.count("params", "t_xi", p.t_xi);
  r.real("params", "mu", p.mu);
  r.real("params", "alpha", p.alpha);
  r.real("params", "beta", p.beta);
  r.count("params", "max_m", p.max_m);
  r.real("params", "x_max", p.x_max);
  r.count("params", "t_o", p.t_o);
  r.real("params", "p_deep1", p.p_deep1);
  r.real("params", "p_rec", p.p_rec);
  r.real("params", "dropout_keep", p.dropout_keep);

  if (const auto* v = r.find("engine", "derivative")) {
    if (v->text == "corrected") {
      c.derivative = DerivativeMode::Corrected;
    } else if (v->text == "printed") {
      c.derivative = DerivativeMode::Printed;
    } else {
      ConfigReader::fail(*v, "engine.derivative expects corrected or printed");
    }
  }
  if (const auto* v = r.find("engine", "replay")) {
    if (v->text == "external_and_recurrent") {
      c.replay = ReplayMode::ExternalAndRecurrent;
    } else if (v->text == "external_only") {
      c.replay = ReplayMode::ExternalOnly;
    } else {
      ConfigReader::fail(*v, "engine.replay expects external_and_recurrent or external_only");
    }
  }

  r.text("data", "train_images", c.train_images);
  r.text("data", "train_labels", c.train_labels);
  r.text("data", "test_images", c.test_images);
  r.text("data", "test_labels", c.test_labels);
  r.text("data", "series", c.series);
  r.count("data", "series_length", c.series_length);
  r.real("data", "series_r", c.series_r);
  r.count("data", "train_limit", c.train_limit);
  r.count("data", "test_limit", c.test_limit);

  r.count("train", "epochs", c.epochs);
  r.count("train", "episodes", c.episodes);
  r.count("train", "seed", c.seed);
  r.text("train", "out", c.out);

  r.reject_unknown();
  try {
    validate(c.params);
  } catch (const ContractError& e) {
    throw ConfigError(std::string("invalid params: ") + e.what());
  }
  return c;
}

RunConfig load_run_config(const std::string& path) {
  const auto bytes = read_file(path);
  return parse_run_config({reinterpret_cast<const char*>(bytes.data()), bytes.size()});
}

LayerPlan build_plan(const RunConfig& c) {
  switch (c.architecture) {
    case Architecture::Percit:
      return build_percit(c.inputs, c.layers, c.params, c.seed);
    case Architecture::Rbfit:
      return build_rbfit(c.n, c.m, c.params, {.adjustable = c.adjustable});
    case Architecture::Rrbf:
      return build_rrbf_chaotic(c.m, c.params.max_m, c.params, {.adjustable = c.adjustable});
    case Architecture::Lstmit:
      return build_lstmit(c.n, c.m, c.params, {.max_m = c.params.max_m, .adjustable = c.adjustable});
    case Architecture::Convit:
      return build_convit(c.conv, c.params, {.adjustable = c.adjustable});
  }
  throw ConfigError("unknown architecture");
}

// ---- checkpoint -------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'I', 'B', 'N', 'E', 'T', 'C', 'K', 'P'};

class Writer {
 public:
  void u8(std::uint8_t v) { out_.push_back(v); }
  void u32(std::uint32_t v) { le(v); }
  void u64(std::uint64_t v) { le(v); }
  void i32(int v) { le(static_cast<std::uint32_t>(v)); }
  void f64(double v) { le(std::bit_cast<std::uint64_t>(v)); }
  void str(std::string_view s) {
    u64(s.size());
    out_.insert(out_.end(), s.begin(), s.end());
  }
  void triple(const ConnectionTriple& c) {
    u32(c.layer);
    u32(c.unit);
    u32(c.output);
  }
  void doubles(std::span<const double> v) {
    u64(v.size());
    for (double d : v) f64(d);
  }
  template <class T, class F>
  void seq(const std::vector<T>& v, F each) {
    u64(v.size());
    for (const auto& x : v) each(x);
  }
  void window(const SlidingWindow& w) {
    const auto raw = w.raw();
    u64(raw.capacity);
    u64(raw.width);
    u64(raw.head);
    u64(raw.size);
    u64(raw.gated);
    doubles(raw.ring);
    doubles(raw.sums);
    seq(raw.gates, [&](int g) { i32(g); });
  }
  void table(const ValueTable& t) {
    seq(t, [&](const auto& layer) { seq(layer, [&](const std::vector<double>& v) { doubles(v); }); });
  }

  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  template <class U>
  void le(U v) {
    for (std::size_t i = 0; i < sizeof(U); ++i) out_.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
  }
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() {
    need(1);
    return in_[pos_++];
  }
  std::uint32_t u32() { return le<std::uint32_t>(); }
  std::uint64_t u64() { return le<std::uint64_t>(); }
  int i32() { return static_cast<int>(le<std::uint32_t>()); }
  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }
  bool flag() {
    const std::size_t at = pos_;
    const std::uint8_t v = u8();
    if (v > 1) throw FormatError("bad boolean", at);
    return v == 1;
  }
  std::size_t length(std::size_t element_size) {
    const std::size_t at = pos_;
    const std::uint64_t n = u64();
    // Every element takes at least element_size bytes.
    if (element_size != 0 && n > (in_.size() - pos_) / element_size) throw FormatError("length exceeds data", at);
    return static_cast<std::size_t>(n);
  }
  std::string str() {
    const std::size_t n = length(1);
    std::string s(reinterpret_cast<const char*>(in_.data() + pos_), n);
    pos_ += n;
    return s;
  }
  ConnectionTriple triple() {
    ConnectionTriple c;
    c.layer = u32();
    c.unit = u32();
    c.output = u32();
    return c;
  }
  std::vector<double> doubles() {
    std::vector<double> v(length(8));
    for (double& d : v) d = f64();
    return v;
  }
  template <class F>
  auto seq(std::size_t min_size, F each) {
    const std::size_t n = length(min_size);
    std::vector<decltype(each())> v;
    v.reserve(n);
    for (std::size_t i = 0; i < n; ++i) v.push_back(each());
    return v;
  }
  SlidingWindow window() {
    const std::size_t at = pos_;
    SlidingWindow::Raw raw;
    raw.capacity = u64();
    raw.width = u64();
    raw.head = u64();
    raw.size = u64();
    raw.gated = u64();
    raw.ring = doubles();
    raw.sums = doubles();
    raw.gates = seq(4, [&] { return i32(); });
    try {
      return SlidingWindow::from_raw(std::move(raw));
    } catch (const ContractError&) {
      throw FormatError("inconsistent window", at);
    }
  }
  ValueTable table() {
    return seq(8, [&] { return seq(8, [&] { return doubles(); }); });
  }

  std::size_t pos() const { return pos_; }
  bool done() const { return pos_ == in_.size(); }

 private:
  void need(std::size_t n) {
    if (in_.size() - pos_ < n) throw FormatError("truncated checkpoint", in_.size());
  }
  template <class U>
  U le() {
    need(sizeof(U));
    U v = 0;
    for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(in_[pos_ + i]) << (8 * i);
    pos_ += sizeof(U);
    return v;
  }
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_params(Writer& w, const NeuronParams& p) {
  w.f64(p.omega_max);
  w.f64(p.omega_min);
  w.u32(p.t_xi);
  w.f64(p.mu);
  w.f64(p.alpha);
  w.f64(p.beta);
  w.u32(p.max_m);
  w.f64(p.x_max);
  w.u32(p.t_o);
  w.f64(p.p_deep1);
  w.f64(p.p_rec);
  w.f64(p.dropout_keep);
}

NeuronParams read_params(Reader& r) {
  NeuronParams p;
  p.omega_max = r.f64();
  p.omega_min = r.f64();
  p.t_xi = r.u32();
  p.mu = r.f64();
  p.alpha = r.f64();
  p.beta = r.f64();
  p.max_m = r.u32();
  p.x_max = r.f64();
  p.t_o = r.u32();
  p.p_deep1 = r.f64();
  p.p_rec = r.f64();
  p.dropout_keep = r.f64();
  return p;
}

void write_unit(Writer& w, const NeuronState& s) {
  w.u8(static_cast<std::uint8_t>(s.kind.tag));
  w.u8(s.kind.has_reference);
  w.u32(s.kind.conv_kernel);
  w.u32(s.kind.conv_outputs);
  write_params(w, s.params);
  w.u8(s.recurrent);
  w.u8(s.adjustable);
  w.u8(s.protect_recurrent_links);
  w.seq(s.connections, [&](const ConnectionTriple& c) { w.triple(c); });
  w.doubles(s.weights);
  w.f64(s.bias);
  w.seq(s.reference_slots, [&](std::uint32_t v) { w.u32(v); });
  w.doubles(s.inputs);
  w.f64(s.delta);
  w.f64(s.training_signal);
  w.i32(s.paralysis);
  w.i32(s.local_min);
  w.seq(s.input_stacks, [&](const StackMemory& m) { w.doubles(m.cells()); });
  w.seq(s.reference_stacks, [&](const StackMemory& m) { w.doubles(m.cells()); });
  w.window(s.weight_changes);
  w.window(s.deletion_terms);
  w.seq(s.dropout_mask, [&](std::uint8_t v) { w.u8(v); });
}

NeuronState read_unit(Reader& r) {
  NeuronState s;
  const std::size_t tag_at = r.pos();
  const std::uint8_t tag = r.u8();
  if (tag > static_cast<std::uint8_t>(ModelTag::TanhBlock)) throw FormatError("unknown model tag", tag_at);
  s.kind.tag = static_cast<ModelTag>(tag);
  s.kind.has_reference = r.flag();
  s.kind.conv_kernel = r.u32();
  s.kind.conv_outputs = r.u32();
  s.params = read_params(r);
  s.recurrent = r.flag();
  s.adjustable = r.flag();
  s.protect_recurrent_links = r.flag();
  s.connections = r.seq(12, [&] { return r.triple(); });
  s.weights = r.doubles();
  s.bias = r.f64();
  s.reference_slots = r.seq(4, [&] { return r.u32(); });
  s.inputs = r.doubles();
  s.delta = r.f64();
  s.training_signal = r.f64();
  s.paralysis = r.i32();
  s.local_min = r.i32();
  s.input_stacks = r.seq(8, [&] { return StackMemory::from_cells(r.doubles()); });
  s.reference_stacks = r.seq(8, [&] { return StackMemory::from_cells(r.doubles()); });
  s.weight_changes = r.window();
  s.deletion_terms = r.window();
  s.dropout_mask = r.seq(1, [&] { return r.u8(); });
  return s;
}

// Shape checks so a loaded network cannot index out of bounds.
void check_shapes(const Network& net, std::size_t end) {
  auto bad = [&](const std::string& what) { throw FormatError("checkpoint shape mismatch: " + what, end); };
  if (net.outputs.size() != net.layers.size() || net.coeffs.size() != net.layers.size()) bad("tables");
  for (std::size_t l = 0; l < net.layers.size(); ++l) {
    if (net.outputs[l].size() != net.layers[l].size() || net.coeffs[l].size() != net.layers[l].size()) bad("tables");
    for (std::size_t u = 0; u < net.layers[l].size(); ++u) {
      const NeuronState& s = net.layers[l][u];
      try {
        check_arity(s.kind, s.connections.size());
      } catch (const ModelError& e) {
        bad(e.what());
      }
      const std::size_t arity = output_arity(s.kind);
      if (s.weights.size() != weight_count(s.kind, s.connections.size())) bad("weights");
      if (net.outputs[l][u].size() != arity || net.coeffs[l][u].size() != s.connections.size()) bad("tables");
      if (s.kind.has_reference != !s.reference_slots.empty()) bad("reference slots");
      for (auto r : s.reference_slots) {
        if (r == 0 || r > net.reference_count) bad("reference slots");
      }
      if (s.dropout_mask.size() != arity) bad("dropout mask");
      if (s.recurrent && s.input_stacks.size() != s.connections.size()) bad("stacks");
      if (s.weight_changes.width() != s.weights.size() && s.weight_changes.capacity() != 0) bad("window");
    }
  }
  try {
    check_resolvable(net);
  } catch (const TopologyError& e) {
    bad(e.what());
  }
}

}  // namespace

std::vector<std::uint8_t> serialize_network(const Network& net) {
  Writer w;
  for (char c : kMagic) w.u8(static_cast<std::uint8_t>(c));
  w.u32(kCheckpointVersion);
  w.str(net.name);
  w.u32(net.input_count);
  w.u32(net.reference_count);
  w.u8(static_cast<std::uint8_t>(net.derivative));
  w.u8(static_cast<std::uint8_t>(net.replay));
  w.u64(net.step);
  w.f64(net.control);
  w.i32(net.xi);
  w.i32(net.p);
  std::ostringstream rng;
  rng << net.rng;
  w.str(rng.str());
  w.u64(net.topology_version);
  w.seq(net.output_bindings, [&](const ConnectionTriple& c) { w.triple(c); });
  w.seq(net.layers, [&](const std::vector<NeuronState>& layer) {
    w.seq(layer, [&](const NeuronState& s) { write_unit(w, s); });
  });
  w.table(net.outputs);
  w.table(net.coeffs);
  return w.take();
}

Network deserialize_network(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  for (char c : kMagic) {
    const std::size_t at = r.pos();
    if (r.u8() != static_cast<std::uint8_t>(c)) throw FormatError("not a checkpoint", at);
  }
  const std::size_t version_at = r.pos();
  if (r.u32() != kCheckpointVersion) throw FormatError("unsupported checkpoint version", version_at);
  Network net;
  net.name = r.str();
  net.input_count = r.u32();
  net.reference_count = r.u32();
  const std::size_t modes_at = r.pos();
  const std::uint8_t derivative = r.u8();
  const std::uint8_t replay = r.u8();
  if (derivative > 1 || replay > 1) throw FormatError("unknown mode", modes_at);
  net.derivative = static_cast<DerivativeMode>(derivative);
  net.replay = static_cast<ReplayMode>(replay);
  net.step = r.u64();
  net.control = r.f64();
  net.xi = r.i32();
  net.p = r.i32();
  const std::size_t rng_at = r.pos();
  std::istringstream rng(r.str());
  rng >> net.rng;
  if (!rng) throw FormatError("bad rng state", rng_at);
  net.topology_version = r.u64();
  net.output_bindings = r.seq(12, [&] { return r.triple(); });
  net.layers = r.seq(8, [&] { return r.seq(1, [&] { return read_unit(r); }); });
  net.outputs = r.table();
  net.coeffs = r.table();
  if (!r.done()) throw FormatError("trailing bytes after checkpoint", r.pos());
  check_shapes(net, r.pos());
  return net;
}

void save_checkpoint(const Network& net, const std::string& path) {
  const auto bytes = serialize_network(net);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error("cannot write " + path);
}

Network load_checkpoint(const std::string& path) { return deserialize_network(read_file(path)); }

// ---- metrics ----------------------------------------------------------------

void write_metrics(std::ostream& out, const StepReport& report) { out << format_metrics(report) << '\n'; }

void write_events(std::ostream& out, std::span<const PlasticityEvent> events) {
  for (const auto& e : events) out << format_event(e) << '\n';
}

std::string describe_network(const Network& net) {
  std::ostringstream os;
  os << "network " << (net.name.empty() ? "(unnamed)" : net.name) << ": " << net.input_count << " inputs, "
     << net.reference_count << " references, " << net.layer_count() << " layers, " << net.neuron_count()
     << " units, " << net.link_count() << " links, step " << net.step << '\n';
  for (std::uint32_t l = 1; l <= net.layer_count(); ++l) {
    for (std::uint32_t u = 1; u <= net.unit_count(l); ++u) {
      const NeuronState& s = net.unit(l, u);
      os << "  (" << l << ',' << u << ") " << to_string(s.kind.tag);
      if (s.kind.has_reference) os << " ref";
      if (s.recurrent) os << " recurrent";
      if (s.adjustable) os << " adjustable";
      os << " <-";
      for (const auto& c : s.connections) os << ' ' << to_string(c);
      os << '\n';
    }
  }
  return os.str();
}

}  // namespace ibnet
