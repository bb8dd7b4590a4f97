#include "posekit/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <json.hpp>

#include "posekit/error.hpp"
#include "posekit/rng.hpp"

namespace posekit {
namespace {

struct Evaluation {
  double loss = 0.0;
  std::vector<Matrix> grads;
};

Evaluation evaluate(std::span<const ParamRef> blocks, const LossBuilder& loss, bool with_grads) {
  Tape tape;
  std::vector<Var> leaves;
  leaves.reserve(blocks.size());
  for (const ParamRef& b : blocks) {
    leaves.push_back(with_grads ? tape.parameter(*b.value) : tape.constant(*b.value));
  }
  const Var out = loss(tape, leaves);
  const Matrix& v = out.value();
  if (v.rows() != 1 || v.cols() != 1) {
    throw ShapeError("grad check loss must be 1x1, got " + v.shape_string());
  }
  Evaluation e;
  e.loss = v(0, 0);
  if (!std::isfinite(e.loss)) throw NumericalError("grad check loss is not finite");
  if (with_grads) {
    tape.backward(out);
    for (std::size_t i = 0; i < blocks.size(); ++i) {
      const Matrix& g = leaves[i].grad();
      if (!all_finite(g)) throw NumericalError("non-finite gradient in block " + blocks[i].name);
      e.grads.push_back(g.empty() ? Matrix(blocks[i].value->rows(), blocks[i].value->cols()) : g);
    }
  }
  return e;
}

}  // namespace

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-12});
  return std::abs(analytic - numeric) / denom;
}

GradCheckReport grad_check(std::span<const ParamRef> blocks, const LossBuilder& loss,
                           const GradCheckOptions& opts) {
  if (!(opts.epsilon > 0.0)) throw ConfigError("grad check epsilon must be positive");
  const Evaluation base = evaluate(blocks, loss, true);
  Rng rng(opts.seed);

  GradCheckReport report;
  report.tolerance = opts.tolerance;
  for (std::size_t b = 0; b < blocks.size(); ++b) {
    Matrix& m = *blocks[b].value;
    std::vector<std::size_t> entries(m.size());
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (opts.max_entries_per_block > 0 && entries.size() > opts.max_entries_per_block) {
      for (std::size_t i = 0; i < opts.max_entries_per_block; ++i) {
        const std::size_t j = i + rng.uniform_index(entries.size() - i);
        std::swap(entries[i], entries[j]);
      }
      entries.resize(opts.max_entries_per_block);
    }
    BlockGradReport br;
    br.name = blocks[b].name;
    br.analytic_norm = frobenius_norm(base.grads[b]);
    double diff2 = 0.0;
    double a2 = 0.0;
    double n2 = 0.0;
    for (std::size_t idx : entries) {
      const double orig = m[idx];
      m[idx] = orig + opts.epsilon;
      const double up = evaluate(blocks, loss, false).loss;
      m[idx] = orig - opts.epsilon;
      const double down = evaluate(blocks, loss, false).loss;
      m[idx] = orig;
      const double numeric = (up - down) / (2.0 * opts.epsilon);
      const double analytic = base.grads[b][idx];
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
      br.max_entry_rel_error = std::max(br.max_entry_rel_error, relative_error(analytic, numeric));
      br.max_abs_error = std::max(br.max_abs_error, std::abs(analytic - numeric));
      ++br.checked;
    }
    br.rel_error = std::sqrt(diff2) / std::max({std::sqrt(a2), std::sqrt(n2), 1e-12});
    report.max_rel_error = std::max(report.max_rel_error, br.rel_error);
    report.blocks.push_back(std::move(br));
  }
  report.passed = report.max_rel_error <= opts.tolerance;
  return report;
}

std::string grad_check_json(const GradCheckReport& report) {
  nlohmann::ordered_json doc;
  doc["passed"] = report.passed;
  doc["tolerance"] = report.tolerance;
  doc["max_rel_error"] = report.max_rel_error;
  nlohmann::ordered_json blocks = nlohmann::ordered_json::array();
  for (const BlockGradReport& b : report.blocks) {
    nlohmann::ordered_json j;
    j["name"] = b.name;
    j["checked"] = b.checked;
    j["rel_error"] = b.rel_error;
    j["max_entry_rel_error"] = b.max_entry_rel_error;
    j["max_abs_error"] = b.max_abs_error;
    j["analytic_norm"] = b.analytic_norm;
    blocks.push_back(std::move(j));
  }
  doc["blocks"] = std::move(blocks);
  return doc.dump(2) + "\n";
}

}  // namespace posekit
