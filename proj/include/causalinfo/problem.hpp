#pragma once

#include <fstream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "causalinfo/joint.hpp"
#include "causalinfo/kernels.hpp"
#include "causalinfo/rate_distortion.hpp"

namespace causalinfo {

/// Parse or validation failure, with the offending field in the message.
class ProblemError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class SourceType { Iid, Markov, Explicit };
enum class ChannelType { Identity, Bsc, Memoryless, Explicit };

/**
 * Parsed problem file. Numbers are decimal strings parsed to binary floats
 * exactly once and kept verbatim, so writing a parsed problem back out and
 * re-reading it rebuilds bit-identical module inputs. Rates and slopes are
 * in nats throughout; bits appear only in display columns.
 */
struct Problem {
  int horizon = 0;
  int x_size = 0;
  int y_size = 0;

  SourceType source_type = SourceType::Iid;
  std::vector<double> source_pmf;                          // iid
  std::vector<double> source_initial;                      // markov
  std::vector<std::vector<double>> source_transition;      // markov
  std::vector<std::vector<std::vector<double>>> source_stages;  // explicit

  std::optional<ChannelType> channel_type;
  double bsc_crossover = 0.0;
  std::vector<std::vector<double>> channel_matrix;         // memoryless
  std::vector<std::vector<std::vector<double>>> channel_stages;  // explicit

  std::optional<std::vector<std::vector<double>>> distortion;
  std::vector<double> s_grid;
  BaaConfig baa;
  std::optional<std::string> output_csv;

  // Test hook: scale the joint mass before validation to exercise the
  // validation path end to end.
  std::optional<double> debug_scale_joint_mass;
};

namespace problem_detail {

using nlohmann::json;

[[noreturn]] inline void fail(const std::string& field, const std::string& what) {
  throw ProblemError("problem field '" + field + "': " + what);
}

inline const json& require(const json& j, const char* key,
                           const std::string& ctx) {
  if (!j.is_object() || !j.contains(key)) {
    fail(ctx.empty() ? key : ctx + "." + key, "missing");
  }
  return j.at(key);
}

inline double as_number(const json& j, const std::string& field) {
  if (!j.is_number()) fail(field, "expected a number");
  return j.get<double>();
}

inline int as_int(const json& j, const std::string& field) {
  if (!j.is_number_integer()) fail(field, "expected an integer");
  return j.get<int>();
}

inline std::vector<double> as_vector(const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(as_number(v, field));
  return out;
}

inline std::vector<std::vector<double>> as_matrix(const json& j,
                                                  const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of rows");
  std::vector<std::vector<double>> out;
  out.reserve(j.size());
  for (const auto& row : j) out.push_back(as_vector(row, field));
  return out;
}

inline std::vector<std::vector<std::vector<double>>> as_stage_list(
    const json& j, const std::string& field) {
  if (!j.is_array()) fail(field, "expected an array of stage tables");
  std::vector<std::vector<std::vector<double>>> out;
  out.reserve(j.size());
  for (const auto& st : j) out.push_back(as_matrix(st, field));
  return out;
}

/// Stage tables in a declared row order -> kernel family of the given kind.
inline CausalKernelFamily family_from_stages(
    KernelKind kind, const SequenceIndexer& x, const SequenceIndexer& y,
    const std::vector<std::vector<std::vector<double>>>& tables,
    const std::string& field) {
  if (static_cast<int>(tables.size()) != x.num_stages()) {
    fail(field, "expected " + std::to_string(x.num_stages()) + " stage tables");
  }
  std::vector<StageKernel> stages;
  for (int i = 0; i < x.num_stages(); ++i) {
    const auto& t = tables[static_cast<std::size_t>(i)];
    const auto shape = detail::cond_shape(kind, i);
    const std::size_t rows =
        x.prefix_count(shape.x_len) * y.prefix_count(shape.y_len);
    const int cols =
        detail::emits_x(kind) ? x.stage(i).size() : y.stage(i).size();
    if (t.size() != rows) {
      fail(field, "stage " + std::to_string(i) + " needs " +
                      std::to_string(rows) + " rows, got " +
                      std::to_string(t.size()));
    }
    StageKernel st(rows, cols);
    for (std::size_t r = 0; r < rows; ++r) {
      if (static_cast<int>(t[r].size()) != cols) {
        fail(field, "stage " + std::to_string(i) + " row " + std::to_string(r) +
                        " needs " + std::to_string(cols) + " entries");
      }
      for (int c = 0; c < cols; ++c) {
        st.at(r, c) = t[r][static_cast<std::size_t>(c)];
      }
    }
    stages.push_back(std::move(st));
  }
  try {
    return CausalKernelFamily(kind, x, y, std::move(stages));
  } catch (const std::invalid_argument& e) {
    fail(field, e.what());
  }
}

}  // namespace problem_detail

inline Problem parse_problem_json(const nlohmann::json& j) {
  using problem_detail::as_int;
  using problem_detail::as_matrix;
  using problem_detail::as_number;
  using problem_detail::as_stage_list;
  using problem_detail::as_vector;
  using problem_detail::fail;
  using problem_detail::require;

  Problem p;
  p.horizon = as_int(require(j, "horizon", ""), "horizon");
  if (p.horizon < 0) fail("horizon", "must be >= 0");

  const auto& alpha = require(j, "alphabet", "");
  p.x_size = as_int(require(alpha, "x", "alphabet"), "alphabet.x");
  p.y_size = as_int(require(alpha, "y", "alphabet"), "alphabet.y");
  if (p.x_size < 1 || p.y_size < 1) fail("alphabet", "sizes must be >= 1");

  // Same up-front guard as the joint table itself.
  try {
    JointCausalDistribution::check_size(
        SequenceIndexer::constant(p.horizon, Alphabet(p.x_size, "x")),
        SequenceIndexer::constant(p.horizon, Alphabet(p.y_size, "y")));
  } catch (const std::length_error& e) {
    fail("horizon", e.what());
  }

  const auto& src = require(j, "source", "");
  const std::string stype = require(src, "type", "source").get<std::string>();
  if (stype == "iid") {
    p.source_type = SourceType::Iid;
    p.source_pmf = as_vector(require(src, "pmf", "source"), "source.pmf");
  } else if (stype == "markov") {
    p.source_type = SourceType::Markov;
    p.source_initial =
        as_vector(require(src, "initial", "source"), "source.initial");
    p.source_transition =
        as_matrix(require(src, "transition", "source"), "source.transition");
  } else if (stype == "explicit") {
    p.source_type = SourceType::Explicit;
    p.source_stages =
        as_stage_list(require(src, "stages", "source"), "source.stages");
  } else {
    fail("source.type", "unknown type '" + stype + "'");
  }

  if (j.contains("channel")) {
    const auto& ch = j.at("channel");
    const std::string ctype = require(ch, "type", "channel").get<std::string>();
    if (ctype == "identity") {
      p.channel_type = ChannelType::Identity;
    } else if (ctype == "bsc") {
      p.channel_type = ChannelType::Bsc;
      p.bsc_crossover =
          as_number(require(ch, "crossover", "channel"), "channel.crossover");
      if (p.bsc_crossover < 0.0 || p.bsc_crossover > 1.0) {
        fail("channel.crossover", "must be in [0, 1]");
      }
    } else if (ctype == "memoryless") {
      p.channel_type = ChannelType::Memoryless;
      p.channel_matrix =
          as_matrix(require(ch, "matrix", "channel"), "channel.matrix");
    } else if (ctype == "explicit") {
      p.channel_type = ChannelType::Explicit;
      p.channel_stages =
          as_stage_list(require(ch, "stages", "channel"), "channel.stages");
    } else {
      fail("channel.type", "unknown type '" + ctype + "'");
    }
  }

  if (j.contains("distortion")) {
    p.distortion = as_matrix(require(j.at("distortion"), "matrix", "distortion"),
                             "distortion.matrix");
  }

  if (j.contains("s_grid")) {
    p.s_grid = as_vector(j.at("s_grid"), "s_grid");
    for (double s : p.s_grid) {
      if (s > 0.0) fail("s_grid", "slopes must be <= 0");
    }
  }

  if (j.contains("baa")) {
    const auto& b = j.at("baa");
    if (b.contains("tol_marginal")) {
      p.baa.tol_marginal = as_number(b.at("tol_marginal"), "baa.tol_marginal");
    }
    if (b.contains("tol_fixed_point")) {
      p.baa.tol_fixed_point =
          as_number(b.at("tol_fixed_point"), "baa.tol_fixed_point");
    }
    if (b.contains("max_iter")) {
      p.baa.max_iter = as_int(b.at("max_iter"), "baa.max_iter");
    }
    if (b.contains("init")) {
      const std::string init = b.at("init").get<std::string>();
      if (init == "uniform") {
        p.baa.init = BaaInit::Uniform;
      } else if (init == "seeded_random_positive") {
        p.baa.init = BaaInit::SeededRandomPositive;
      } else {
        fail("baa.init", "expected 'uniform' or 'seeded_random_positive'");
      }
    }
    if (b.contains("seed")) {
      p.baa.seed = static_cast<std::uint64_t>(
          as_int(b.at("seed"), "baa.seed"));
    }
    try {
      p.baa.validate();
    } catch (const std::invalid_argument& e) {
      fail("baa", e.what());
    }
  }

  if (j.contains("output") && j.at("output").contains("csv")) {
    p.output_csv = j.at("output").at("csv").get<std::string>();
  }

  if (j.contains("debug") && j.at("debug").contains("scale_joint_mass")) {
    p.debug_scale_joint_mass = as_number(
        j.at("debug").at("scale_joint_mass"), "debug.scale_joint_mass");
  }
  return p;
}

inline Problem parse_problem_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProblemError(std::string("problem file is not valid JSON: ") +
                       e.what());
  }
  return parse_problem_json(j);
}

inline Problem parse_problem_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::ios_base::failure("cannot open problem file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_problem_text(buf.str());
}

inline nlohmann::json problem_to_json(const Problem& p) {
  nlohmann::json j;
  j["horizon"] = p.horizon;
  j["alphabet"] = {{"x", p.x_size}, {"y", p.y_size}};
  switch (p.source_type) {
    case SourceType::Iid:
      j["source"] = {{"type", "iid"}, {"pmf", p.source_pmf}};
      break;
    case SourceType::Markov:
      j["source"] = {{"type", "markov"},
                     {"initial", p.source_initial},
                     {"transition", p.source_transition}};
      break;
    case SourceType::Explicit:
      j["source"] = {{"type", "explicit"}, {"stages", p.source_stages}};
      break;
  }
  if (p.channel_type) {
    switch (*p.channel_type) {
      case ChannelType::Identity:
        j["channel"] = {{"type", "identity"}};
        break;
      case ChannelType::Bsc:
        j["channel"] = {{"type", "bsc"}, {"crossover", p.bsc_crossover}};
        break;
      case ChannelType::Memoryless:
        j["channel"] = {{"type", "memoryless"}, {"matrix", p.channel_matrix}};
        break;
      case ChannelType::Explicit:
        j["channel"] = {{"type", "explicit"}, {"stages", p.channel_stages}};
        break;
    }
  }
  if (p.distortion) j["distortion"] = {{"matrix", *p.distortion}};
  if (!p.s_grid.empty()) j["s_grid"] = p.s_grid;
  j["baa"] = {{"tol_marginal", p.baa.tol_marginal},
              {"tol_fixed_point", p.baa.tol_fixed_point},
              {"max_iter", p.baa.max_iter},
              {"init", p.baa.init == BaaInit::Uniform
                           ? "uniform"
                           : "seeded_random_positive"},
              {"seed", p.baa.seed}};
  if (p.output_csv) j["output"] = {{"csv", *p.output_csv}};
  if (p.debug_scale_joint_mass) {
    j["debug"] = {{"scale_joint_mass", *p.debug_scale_joint_mass}};
  }
  return j;
}

inline CausalKernelFamily build_source(const Problem& p) {
  const Alphabet ax(p.x_size, "x");
  const Alphabet ay(p.y_size, "y");
  try {
    switch (p.source_type) {
      case SourceType::Iid:
        return make_iid_source(p.horizon, FinitePmf(ax, p.source_pmf), ay);
      case SourceType::Markov:
        return make_markov_source(p.horizon, FinitePmf(ax, p.source_initial),
                                  p.source_transition, ay);
      case SourceType::Explicit:
        return problem_detail::family_from_stages(
            KernelKind::SourceFeedback, SequenceIndexer::constant(p.horizon, ax),
            SequenceIndexer::constant(p.horizon, ay), p.source_stages,
            "source.stages");
    }
  } catch (const std::invalid_argument& e) {
    throw ProblemError(std::string("problem field 'source': ") + e.what());
  }
  throw std::logic_error("unreachable source type");
}

inline CausalKernelFamily build_channel(const Problem& p) {
  if (!p.channel_type) {
    throw ProblemError(
        "problem field 'channel': required by this command but missing");
  }
  const Alphabet ax(p.x_size, "x");
  const Alphabet ay(p.y_size, "y");
  try {
    switch (*p.channel_type) {
      case ChannelType::Identity:
        if (p.x_size != p.y_size) {
          throw ProblemError(
              "problem field 'channel': identity needs matching alphabets");
        }
        return make_identity_channel(p.horizon, ax);
      case ChannelType::Bsc:
        if (p.x_size != 2 || p.y_size != 2) {
          throw ProblemError("problem field 'channel': bsc needs binary alphabets");
        }
        return make_bsc_channel(p.horizon, p.bsc_crossover);
      case ChannelType::Memoryless:
        return make_memoryless_channel(p.horizon, p.channel_matrix, ax, ay);
      case ChannelType::Explicit:
        return problem_detail::family_from_stages(
            KernelKind::ChannelFeedforward,
            SequenceIndexer::constant(p.horizon, ax),
            SequenceIndexer::constant(p.horizon, ay), p.channel_stages,
            "channel.stages");
    }
  } catch (const std::invalid_argument& e) {
    throw ProblemError(std::string("problem field 'channel': ") + e.what());
  }
  throw std::logic_error("unreachable channel type");
}

inline DistortionSpec build_distortion(const Problem& p) {
  if (!p.distortion) {
    throw ProblemError(
        "problem field 'distortion': required by this command but missing");
  }
  try {
    return DistortionSpec(p.horizon, *p.distortion);
  } catch (const std::invalid_argument& e) {
    throw ProblemError(std::string("problem field 'distortion': ") + e.what());
  }
}

inline std::vector<Slope> slope_grid(const Problem& p) {
  if (p.s_grid.empty()) {
    throw ProblemError(
        "problem field 's_grid': required by this command but missing");
  }
  std::vector<Slope> out;
  out.reserve(p.s_grid.size());
  for (double s : p.s_grid) out.push_back(Slope(s));
  return out;
}

}  // namespace causalinfo
