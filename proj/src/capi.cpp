#include "bqcf/bqcf.h"

#include <cstring>
#include <new>
#include <optional>
#include <string>
#include <variant>

#include "bqcf/config.hpp"
#include "bqcf/error.hpp"
#include "bqcf/experiments.hpp"

struct bqcf_config {
  bqcf::Config cfg;
};

struct bqcf_result {
  bqcf::ExperimentResult res;
  std::string fit_json;
  std::string csv;
};

struct bqcf_op {
  std::variant<bqcf::Op1D, bqcf::Op2D> op;
};

namespace {

thread_local bqcf_status g_code = BQCF_OK;
thread_local std::string g_message;

bqcf_status set_error(bqcf_status s, const std::string& msg) {
  g_code = s;
  g_message = msg;
  return s;
}

template <class F>
bqcf_status guard(F&& fn) {
  try {
    fn();
    g_code = BQCF_OK;
    g_message.clear();
    return BQCF_OK;
  } catch (const bqcf::Error& e) {
    return set_error(static_cast<bqcf_status>(e.status()), e.what());
  } catch (const std::bad_alloc&) {
    return set_error(BQCF_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return set_error(BQCF_INTERNAL, e.what());
  } catch (...) {
    return set_error(BQCF_INTERNAL, "unknown error");
  }
}

void need(const void* p, const char* what) {
  if (!p) bqcf::fail(std::string("null argument: ") + what);
}

}  // namespace

extern "C" {

bqcf_status bqcf_last_error_code(void) { return g_code; }
const char* bqcf_last_error_message(void) { return g_message.c_str(); }

const char* bqcf_status_name(bqcf_status s) {
  switch (s) {
    case BQCF_OK: return "ok";
    case BQCF_INVALID_ARGUMENT: return "invalid_argument";
    case BQCF_SOLVER_FAILURE: return "solver_failure";
    case BQCF_CONFIG_ERROR: return "config_error";
    case BQCF_IO_ERROR: return "io_error";
    case BQCF_CHECK_FAILED: return "check_failed";
    case BQCF_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* bqcf_version(void) { return "1.0.0"; }

bqcf_status bqcf_config_new(bqcf_config** out) {
  return guard([&] {
    need(out, "out");
    *out = new bqcf_config{};
  });
}

bqcf_status bqcf_config_parse_file(const char* path, bqcf_config** out) {
  return guard([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto* c = new bqcf_config{bqcf::Config::load(path)};
    *out = c;
  });
}

bqcf_status bqcf_config_parse_string(const char* text, bqcf_config** out) {
  return guard([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    *out = new bqcf_config{bqcf::Config::parse(text)};
  });
}

bqcf_status bqcf_config_set(bqcf_config* cfg, const char* key, const char* value) {
  return guard([&] {
    need(cfg, "cfg");
    need(key, "key");
    need(value, "value");
    cfg->cfg.set(key, value);
  });
}

void bqcf_config_free(bqcf_config* cfg) { delete cfg; }

size_t bqcf_experiment_count(void) { return bqcf::experiment_names().size(); }

const char* bqcf_experiment_name(size_t i) {
  const auto& n = bqcf::experiment_names();
  return i < n.size() ? n[i].c_str() : nullptr;
}

bqcf_status bqcf_run(const char* experiment, const bqcf_config* cfg, int threads, uint64_t seed, const char* out_dir,
                     bqcf_result** out) {
  return guard([&] {
    need(experiment, "experiment");
    need(out, "out");
    *out = nullptr;
    if (threads < 1) bqcf::fail("threads must be at least 1");
    bqcf::RunOptions opt;
    opt.threads = threads;
    opt.seed = seed;
    if (out_dir) opt.out_dir = out_dir;
    const bqcf::Config empty;
    auto* r = new bqcf_result{};
    try {
      r->res = bqcf::run(experiment, cfg ? cfg->cfg : empty, opt);
      r->fit_json = r->res.fit.dump(2);
      r->csv = r->res.rows.to_csv();
    } catch (...) {
      delete r;
      throw;
    }
    *out = r;
  });
}

int bqcf_result_passed(const bqcf_result* r) { return r && r->res.passed() ? 1 : 0; }
const char* bqcf_result_summary(const bqcf_result* r) { return r ? r->res.summary.c_str() : ""; }
const char* bqcf_result_fit_json(const bqcf_result* r) { return r ? r->fit_json.c_str() : ""; }
const char* bqcf_result_csv(const bqcf_result* r) { return r ? r->csv.c_str() : ""; }
size_t bqcf_result_check_count(const bqcf_result* r) { return r ? r->res.checks.size() : 0; }

bqcf_status bqcf_result_check(const bqcf_result* r, size_t i, const char** name, int* passed, const char** detail) {
  return guard([&] {
    need(r, "result");
    if (i >= r->res.checks.size()) bqcf::fail("check index out of range");
    const auto& c = r->res.checks[i];
    if (name) *name = c.name.c_str();
    if (passed) *passed = c.passed ? 1 : 0;
    if (detail) *detail = c.detail.c_str();
  });
}

bqcf_status bqcf_result_write(const bqcf_result* r, const char* dir) {
  return guard([&] {
    need(r, "result");
    need(dir, "dir");
    r->res.write(dir);
  });
}

void bqcf_result_free(bqcf_result* r) { delete r; }

bqcf_status bqcf_op1d_new(const char* kind, int N, double phiF, double phi2F, int K, bqcf_op** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    *out = nullptr;
    const bqcf::Chain1D c(N);
    std::optional<bqcf::Blend1D> b;
    if (K > 0) b = bqcf::build_blend_1d(c, K, bqcf::default_center_1d(c, K));
    *out = new bqcf_op{bqcf::Op1D(bqcf::parse_kind_1d(kind), c, bqcf::make_model_1d(phiF, phi2F), b)};
  });
}

bqcf_status bqcf_op1d_new_blend(const char* kind, int N, double phiF, double phi2F, const double* beta, bqcf_op** out) {
  return guard([&] {
    need(kind, "kind");
    need(beta, "beta");
    need(out, "out");
    *out = nullptr;
    const bqcf::Chain1D c(N);
    const bqcf::Vec v = Eigen::Map<const bqcf::Vec>(beta, c.size());
    *out = new bqcf_op{
        bqcf::Op1D(bqcf::parse_kind_1d(kind), c, bqcf::make_model_1d(phiF, phi2F), bqcf::blend_from_samples(c, v))};
  });
}

bqcf_status bqcf_op2d_new_toy(const char* kind, int N, double k_nn, double lambda, double delta, int Ra, int Rb,
                              int margin, bqcf_op** out) {
  return guard([&] {
    need(kind, "kind");
    need(out, "out");
    *out = nullptr;
    const bqcf::TriLattice2D lat(N);
    std::optional<bqcf::Blend2D> b;
    if (Rb > Ra) b = bqcf::build_radial_blend_2d(lat, Ra, Rb, margin);
    *out = new bqcf_op{bqcf::Op2D(bqcf::parse_kind_2d(kind), lat, bqcf::toy_model_2d(k_nn, lambda, delta), b)};
  });
}

bqcf_status bqcf_op_dim(const bqcf_op* op, size_t* dim) {
  return guard([&] {
    need(op, "op");
    need(dim, "dim");
    *dim = std::visit(
        [](const auto& o) -> size_t {
          if constexpr (std::is_same_v<std::decay_t<decltype(o)>, bqcf::Op1D>)
            return static_cast<size_t>(o.chain.size());
          else
            return static_cast<size_t>(o.lattice.dofs());
        },
        op->op);
  });
}

bqcf_status bqcf_op_apply(const bqcf_op* op, const double* u, double* out) {
  return guard([&] {
    need(op, "op");
    need(u, "u");
    need(out, "out");
    size_t n = 0;
    if (bqcf_op_dim(op, &n) != BQCF_OK) throw bqcf::Error(bqcf::Status::internal, g_message);
    const bqcf::Vec x = Eigen::Map<const bqcf::Vec>(u, static_cast<Eigen::Index>(n));
    bqcf::Vec y;
    if (const auto* o1 = std::get_if<bqcf::Op1D>(&op->op)) {
      y = bqcf::apply(*o1, x);
    } else {
      const auto& o2 = std::get<bqcf::Op2D>(op->op);
      if (o2.kind == bqcf::Kind2D::ltilde) {
        y = bqcf::assemble(o2).A * x;
        y /= o2.lattice.eps * o2.lattice.eps;
      } else {
        y = bqcf::apply2d(o2, x);
      }
    }
    std::memcpy(out, y.data(), n * sizeof(double));
  });
}

bqcf_status bqcf_op_quad_form(const bqcf_op* op, const double* u, double* value) {
  return guard([&] {
    need(op, "op");
    need(u, "u");
    need(value, "value");
    size_t n = 0;
    if (bqcf_op_dim(op, &n) != BQCF_OK) throw bqcf::Error(bqcf::Status::internal, g_message);
    const bqcf::Vec x = Eigen::Map<const bqcf::Vec>(u, static_cast<Eigen::Index>(n));
    if (const auto* o1 = std::get_if<bqcf::Op1D>(&op->op)) {
      *value = bqcf::quad_form(*o1, x);
    } else {
      const auto& o2 = std::get<bqcf::Op2D>(op->op);
      if (o2.kind == bqcf::Kind2D::ltilde)
        *value = bqcf::apply_ltilde(o2.lattice, o2.model, *o2.blend, x, o2.weight);
      else
        *value = bqcf::inner2d(o2.lattice, bqcf::apply2d(o2, x), x);
    }
  });
}

bqcf_status bqcf_op_coercivity(const bqcf_op* op, const char* method, double* gamma) {
  return guard([&] {
    need(op, "op");
    need(gamma, "gamma");
    bqcf::SolverOptions opt;
    if (method) opt.method = bqcf::parse_method(method);
    *gamma = std::visit([&](const auto& o) { return bqcf::coercivity(o, opt).gamma; }, op->op);
  });
}

bqcf_status bqcf_op_export_mm(const bqcf_op* op, const char* path) {
  return guard([&] {
    need(op, "op");
    need(path, "path");
    std::visit([&](const auto& o) { bqcf::write_matrix_market(bqcf::assemble(o), path); }, op->op);
  });
}

void bqcf_op_free(bqcf_op* op) { delete op; }

}  // extern "C"
