#include "gstab/spec_io.hpp"

#include <complex>
#include <fstream>
#include <sstream>
#include <string>

#include "gstab/errors.hpp"

namespace gstab::spec_io {

namespace {

bool is_entry(const json& v) {
  if (v.is_number()) return true;
  return v.is_array() && v.size() == 2 && v[0].is_number() && v[1].is_number();
}

std::complex<double> to_entry(const json& v) {
  if (v.is_number()) return {v.get<double>(), 0.0};
  return {v[0].get<double>(), v[1].get<double>()};
}

const json* find(const json& obj, const char* key) {
  const auto it = obj.find(key);
  return it == obj.end() ? nullptr : &*it;
}

int require_int(const json& obj, const char* key, const std::string& where) {
  const json* v = find(obj, key);
  if (!v || !v->is_number_integer()) {
    throw ValidationError(where + " needs an integer field \"" + key + "\"");
  }
  return v->get<int>();
}

SpaceSpec parse_space(const json* node, int dim) {
  if (!node) return SpaceSpec::l2(dim);
  if (!node->is_object()) throw ValidationError("\"space\" must be an object");
  const json* norm = find(*node, "norm");
  if (!norm || !norm->is_string()) {
    throw ValidationError("\"space\" needs a string field \"norm\" (\"l2\" or \"lp\")");
  }
  const std::string kind = norm->get<std::string>();
  if (kind == "l2") return SpaceSpec::l2(dim);
  if (kind == "lp") {
    const json* p = find(*node, "p");
    if (!p || !p->is_number()) throw ValidationError("lp space needs a numeric field \"p\"");
    return SpaceSpec::lp(dim, p->get<double>());
  }
  throw ValidationError("unknown space norm \"" + kind + "\"; expected \"l2\" or \"lp\"");
}

SystemSection parse_system(const json& node) {
  if (!node.is_object()) throw ValidationError("\"system\" must be an object");
  SystemSection sys;
  sys.m = require_int(node, "m", "\"system\"");
  if (sys.m < 1) throw ValidationError("system dimension m must be >= 1");
  const json* a = find(node, "A");
  if (!a) throw ValidationError("\"system\" needs a matrix field \"A\"");
  sys.a = parse_matrix(*a, sys.m, sys.m, "A");
  sys.space = parse_space(find(node, "space"), sys.m);

  if (const json* b = find(node, "B")) {
    const json* d = find(node, "d");
    if (!d || !d->is_number_integer()) {
      throw ValidationError("\"system\" with B needs an integer field \"d\"");
    }
    sys.d = d->get<int>();
    if (sys.d < 1) throw ValidationError("noise dimension d must be >= 1");
    sys.b = parse_matrix(*b, sys.m, sys.d, "B");
    sys.has_b = true;
  } else if (find(node, "d")) {
    throw ValidationError("\"system\" declares d but has no matrix field \"B\"");
  }
  return sys;
}

FramesSection parse_frames(const json& node) {
  if (!node.is_object()) throw ValidationError("\"frames\" must be an object");
  FramesSection fr;
  const json* a = find(node, "a");
  if (!a || !a->is_number()) throw ValidationError("\"frames\" needs a numeric field \"a\"");
  fr.a = a->get<double>();
  if (!(fr.a > 0.0)) throw ValidationError("frame decay a must be positive");
  if (const json* rho = find(node, "rho")) {
    if (!rho->is_number()) throw ValidationError("\"rho\" must be a number");
    fr.rho = rho->get<double>();
  }
  if (find(node, "n_min")) fr.n_min = require_int(node, "n_min", "\"frames\"");
  if (find(node, "n_max")) fr.n_max = require_int(node, "n_max", "\"frames\"");
  if (fr.n_min > fr.n_max) throw ValidationError("frames need n_min <= n_max");
  if (find(node, "grid")) fr.grid = require_int(node, "grid", "\"frames\"");
  if (fr.grid < 2) throw ValidationError("frame grid needs at least 2 points");
  if (find(node, "gram_size")) fr.gram_size = require_int(node, "gram_size", "\"frames\"");
  if (fr.gram_size < 1) throw ValidationError("gram_size must be >= 1");
  return fr;
}

McSection parse_mc(const json* node) {
  McSection mc;
  if (!node) return mc;
  if (!node->is_object()) throw ValidationError("\"mc\" must be an object");
  if (const json* s = find(*node, "samples")) {
    if (!s->is_number_integer()) throw ValidationError("\"samples\" must be an integer");
    mc.samples = s->get<std::int64_t>();
    if (mc.samples <= 0) throw ValidationError("\"samples\" must be positive");
  }
  if (const json* s = find(*node, "seed")) {
    if (!s->is_number_integer() || s->get<std::int64_t>() < 0) {
      throw ValidationError("\"seed\" must be a nonnegative integer");
    }
    mc.seed = s->get<std::uint64_t>();
  }
  return mc;
}

std::vector<AnalysisRequest> parse_analyses(const json* node) {
  std::vector<AnalysisRequest> out;
  if (!node) return out;
  if (!node->is_array()) throw ValidationError("\"analyses\" must be an array");
  for (const json& item : *node) {
    AnalysisRequest req;
    if (item.is_string()) {
      req.name = item.get<std::string>();
      req.params = json::object();
    } else if (item.is_object()) {
      const json* name = find(item, "name");
      if (!name || !name->is_string()) {
        throw ValidationError("analysis objects need a string field \"name\"");
      }
      req.name = name->get<std::string>();
      req.params = item;
      req.params.erase("name");
    } else {
      throw ValidationError("each analysis must be a name string or an object with \"name\"");
    }
    out.push_back(std::move(req));
  }
  return out;
}

}  // namespace

Eigen::MatrixXcd parse_matrix(const json& value, int rows, int cols, const std::string& field) {
  if (!value.is_array()) throw ValidationError("matrix \"" + field + "\" must be an array");
  Eigen::MatrixXcd m(rows, cols);

  // Flat row-major layout first; [re, im] pairs make a 1 x n flat list
  // distinguishable from a nested single row.
  const auto flat = [&]() -> bool {
    if (int(value.size()) != rows * cols) return false;
    for (const json& v : value) {
      if (!is_entry(v)) return false;
    }
    int k = 0;
    for (int i = 0; i < rows; ++i) {
      for (int j = 0; j < cols; ++j) m(i, j) = to_entry(value[k++]);
    }
    return true;
  };
  const auto nested = [&]() -> bool {
    if (int(value.size()) != rows) return false;
    for (int i = 0; i < rows; ++i) {
      const json& row = value[i];
      if (!row.is_array() || int(row.size()) != cols) return false;
      for (int j = 0; j < cols; ++j) {
        if (!is_entry(row[j])) return false;
        m(i, j) = to_entry(row[j]);
      }
    }
    return true;
  };
  if (flat() || nested()) return m;
  throw ValidationError("matrix \"" + field + "\" must hold " + std::to_string(rows) + "x" +
                        std::to_string(cols) +
                        " entries, flat row-major or row-nested, entries as numbers or [re, im]");
}

SpecFile parse_spec(const std::string& text) {
  SpecFile spec;
  try {
    spec.raw = json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    // Recover the line number from the byte offset for the diagnostic.
    std::size_t line = 1;
    for (std::size_t i = 0; i < e.byte && i < text.size(); ++i) {
      if (text[i] == '\n') ++line;
    }
    throw ParseError("malformed JSON at line " + std::to_string(line) + ": " + e.what());
  }
  if (!spec.raw.is_object()) throw ValidationError("spec root must be a JSON object");

  if (const json* sys = find(spec.raw, "system")) spec.system = parse_system(*sys);
  if (const json* fr = find(spec.raw, "frames")) spec.frames = parse_frames(*fr);
  spec.mc = parse_mc(find(spec.raw, "mc"));
  spec.analyses = parse_analyses(find(spec.raw, "analyses"));
  return spec;
}

SpecFile load_spec(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open spec file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_spec(buf.str());
}

}  // namespace gstab::spec_io
