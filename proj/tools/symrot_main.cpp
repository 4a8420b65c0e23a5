// Copyright 2026 The symrot Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "symrot/bingham2d.hpp"
#include "symrot/fitting.hpp"
#include "symrot/io.hpp"
#include "symrot/symrep.hpp"
#include "symrot/toyfield.hpp"

namespace {

using namespace symrot;

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open file: " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed JSON in " + path + ": " + e.what());
  }
}

void write_output(const std::string& out_path, const std::string& content) {
  if (out_path == "-") {
    std::cout << content;
    return;
  }
  std::ofstream os(out_path);
  if (!os) throw std::runtime_error("cannot open output file: " + out_path);
  os << content;
}

RepKind parse_kind(const std::string& name) {
  if (name == "ours") return RepKind::kOurs;
  if (name == "rotmat") return RepKind::kRotMat;
  if (name == "quat") return RepKind::kQuat;
  throw std::invalid_argument("unknown representation kind: " + name);
}

Vector3d lambda_from_flag(const std::vector<double>& values) {
  if (values.size() != 3) throw std::invalid_argument("--lambda expects three values l1,l2,l3");
  return Vector3d(values[0], values[1], values[2]);
}

struct GlobalOptions {
  std::uint64_t seed = 0;
  std::string out = "-";
  QuadratureConfigd quad;
};

void run_sample(const GlobalOptions& g, const std::string& dist_path, std::size_t count) {
  const NormConstPland plan(g.quad);
  const Bingham2Dd dist = distribution_from_json(load_json_file(dist_path), plan);
  const SampleSetd samples = dist.sample(count, SplitMix64(g.seed).split(1)());
  std::ostringstream os;
  write_samples_csv(os, samples);
  write_output(g.out, os.str());
}

void run_normconst(const GlobalOptions& g, const Vector3d& lambda, bool with_grad) {
  const NormConstPland plan(g.quad);
  json out;
  if (with_grad) {
    const auto [value, grad] = plan.value_and_grad(lambda);
    out["C"] = value;
    out["dC"] = json::array({grad[0], grad[1], grad[2]});
  } else {
    out["C"] = plan.value(lambda);
  }
  write_output(g.out, out.dump(2) + "\n");
}

void run_percentile(const GlobalOptions& g, const Vector3d& lambda, double p, bool empirical,
                    std::size_t count) {
  const NormConstPland plan(g.quad);
  const Bingham2Dd dist = Bingham2Dd::analyze(Matrix3d(lambda.asDiagonal()), plan);
  std::optional<SampleSetd> samples;
  if (empirical) samples = dist.sample(count, SplitMix64(g.seed).split(2)());
  json out;
  for (int axis = 1; axis <= 2; ++axis) {
    json entry;
    const double gap = dist.lambda()[2] - dist.lambda()[axis - 1];
    if (gap > 0 && p < 1.0) {
      entry["approx"] = percentile_theta_approx(dist.lambda(), axis, p);
    } else {
      entry["approx"] = nullptr;  // undefined for a degenerate axis or p = 1
    }
    if (samples) entry["empirical"] = percentile_theta_empirical(*samples, axis, p);
    out["axis" + std::to_string(axis)] = entry;
  }
  write_output(g.out, out.dump(2) + "\n");
}

void run_fit(const GlobalOptions& g, const std::string& samples_path, const FitOptionsd& opts) {
  std::ifstream in(samples_path);
  if (!in) throw std::invalid_argument("cannot open file: " + samples_path);
  const SampleSetd samples = read_samples_csv(in);
  const FitReportd report = fit_mle(samples, opts, g.quad);
  write_output(g.out, fit_report_to_json(report).dump(2) + "\n");
}

void run_loss(const GlobalOptions& g, const std::string& rep_path, const std::string& gt_path,
              const std::string& kind_name, bool with_grad, bool check_flip) {
  const NormConstPland plan(g.quad);
  const RepKind kind = parse_kind(kind_name);
  const json rep_json = load_json_file(rep_path);
  const Matrix3d R_gt = rotation_from_json(load_json_file(gt_path));
  json out;
  switch (kind) {
    case RepKind::kOurs: {
      const PlanarSymRepd rep = rep_from_json(rep_json);
      out["loss"] = rep_loss(rep, R_gt, plan);
      if (check_flip) out["loss_flipped_gt"] = rep_loss(rep, flip_rotation(R_gt), plan);
      if (with_grad) {
        const RepLossGrad<double> grad = rep_loss_grad(rep, R_gt, plan);
        out["grad"] = {{"a", io_detail::vector_to_array(grad.a.data(), 6)},
                       {"x", io_detail::vector_to_array(grad.x.data(), 3)}};
      }
      break;
    }
    case RepKind::kRotMat: {
      const Vector3d ex = io_detail::read_vector<3>(rep_json, "ex");
      const Vector3d ez = io_detail::read_vector<3>(rep_json, "ez");
      const FlipMinLoss<double> r = flipmin_loss_rotmat(ex, ez, R_gt);
      out["loss"] = r.loss;
      out["flipped_branch"] = r.flipped_branch;
      if (check_flip) out["loss_flipped_gt"] = flipmin_loss_rotmat(ex, ez, flip_rotation(R_gt)).loss;
      if (with_grad) {
        const Matrix3d G = r.flipped_branch ? flip_rotation(R_gt) : R_gt;
        const Vector3d gx = detail::cosine_loss_grad(ex, Vector3d(G.col(0)));
        const Vector3d gz = detail::cosine_loss_grad(ez, Vector3d(G.col(2)));
        out["grad"] = {{"ex", io_detail::vector_to_array(gx.data(), 3)},
                       {"ez", io_detail::vector_to_array(gz.data(), 3)}};
      }
      break;
    }
    case RepKind::kQuat: {
      const Eigen::Vector4d qv = io_detail::read_vector<4>(rep_json, "q");
      const Quaternion<double> pred(qv[0], qv[1], qv[2], qv[3]);
      const Quaternion<double> gt(R_gt);
      const FlipMinLoss<double> r = flipmin_loss_quat(pred, gt);
      out["loss"] = r.loss;
      out["flipped_branch"] = r.flipped_branch;
      if (check_flip) {
        out["loss_flipped_gt"] = flipmin_loss_quat(pred, Quaternion<double>(flip_rotation(R_gt))).loss;
      }
      if (with_grad) {
        Quaternion<double> target = r.flipped_branch ? gt * flip_quaternion<double>() : gt;
        const Eigen::Vector4d gvec(target.w(), target.x(), target.y(), target.z());
        const double dot = qv.dot(gvec);
        const double sign = dot >= 0 ? 1.0 : -1.0;
        const Eigen::Vector4d grad = std::abs(dot) * qv - sign * gvec;  // at |q| = 1
        out["grad"] = {{"q", io_detail::vector_to_array(grad.data(), 4)}};
      }
      break;
    }
  }
  write_output(g.out, out.dump(2) + "\n");
}

void run_demo_field(const GlobalOptions& g, const std::string& scene_path,
                    const std::string& kind_name, int epochs, const std::string& field_csv) {
  const FieldScene scene = gen_scene(scene_config_from_json(load_json_file(scene_path)));
  const auto run_one = [&](RepKind kind, std::uint64_t tag) {
    const TinyModel model = train_toy(scene, kind, epochs, SplitMix64(g.seed).split(tag)(), g.quad);
    return model;
  };
  if (kind_name == "all") {
    if (!field_csv.empty()) {
      throw std::invalid_argument("--field-csv requires a single --kind");
    }
    json out;
    out["ours"] = consistency_report_to_json(evaluate_field(run_one(RepKind::kOurs, 10), scene, g.quad));
    out["rotmat"] =
        consistency_report_to_json(evaluate_field(run_one(RepKind::kRotMat, 11), scene, g.quad));
    out["quat"] = consistency_report_to_json(evaluate_field(run_one(RepKind::kQuat, 12), scene, g.quad));
    write_output(g.out, out.dump(2) + "\n");
    return;
  }
  const RepKind kind = parse_kind(kind_name);
  const std::uint64_t tag = kind == RepKind::kOurs ? 10 : kind == RepKind::kRotMat ? 11 : 12;
  const TinyModel model = run_one(kind, tag);
  if (!field_csv.empty()) {
    std::ofstream os(field_csv);
    if (!os) throw std::runtime_error("cannot open output file: " + field_csv);
    dump_field_csv(model, scene, os, g.quad);
  }
  write_output(g.out, consistency_report_to_json(evaluate_field(model, scene, g.quad)).dump(2) + "\n");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"2D-Bingham planar-symmetric rotation toolkit"};
  app.require_subcommand(1);
  app.fallthrough();

  GlobalOptions g;
  app.add_option("--seed", g.seed, "Master seed; all randomness derives from it");
  app.add_option("--out", g.out, "Output path, '-' for stdout");
  app.add_option("--quad-N", g.quad.n, "Quadrature node count N");
  app.add_option("--quad-r", g.quad.r, "Quadrature parameter r (>= 2)");
  app.add_option("--quad-omega", g.quad.omega_d, "Quadrature parameter omega_d");
  app.add_option("--quad-nmin", g.quad.n_min, "Quadrature parameter N_min");
  app.add_option("--quad-dfrac", g.quad.d_frac, "Quadrature parameter d as a fraction of c");

  auto* sample_cmd = app.add_subcommand("sample", "Draw unit vectors from a distribution JSON");
  std::string dist_path;
  std::size_t sample_count = 1000;
  sample_cmd->add_option("--dist", dist_path, "Distribution JSON path")->required();
  sample_cmd->add_option("--n", sample_count, "Number of samples")->required();

  auto* normconst_cmd = app.add_subcommand("normconst", "Normalizing constant C(lambda)");
  std::vector<double> lambda_values;
  bool with_grad = false;
  normconst_cmd->add_option("--lambda", lambda_values, "Eigenvalues l1,l2,l3 (ascending, l3 = 0)")
      ->required()
      ->delimiter(',');
  normconst_cmd->add_flag("--grad", with_grad, "Also emit dC/dlambda");

  auto* percentile_cmd = app.add_subcommand("percentile", "Axis band angles theta_i^(p)");
  std::vector<double> perc_lambda;
  double p = 0.99;
  bool empirical = false;
  std::size_t perc_n = 1000000;
  percentile_cmd->add_option("--lambda", perc_lambda, "Eigenvalues l1,l2,l3")
      ->required()
      ->delimiter(',');
  percentile_cmd->add_option("--p", p, "Band probability")->required();
  percentile_cmd->add_flag("--empirical", empirical, "Also estimate from samples");
  percentile_cmd->add_option("--n", perc_n, "Sample count for --empirical");

  auto* fit_cmd = app.add_subcommand("fit", "Maximum-likelihood fit from a samples CSV");
  std::string samples_path;
  FitOptionsd fit_opts;
  fit_cmd->add_option("--samples", samples_path, "Samples CSV path")->required();
  fit_cmd->add_option("--max-iters", fit_opts.max_iters, "Iteration cap");
  fit_cmd->add_option("--tol", fit_opts.tol, "Gradient-norm stop");
  fit_cmd->add_option("--step", fit_opts.step, "Initial line-search step");
  fit_cmd->add_option("--floor", fit_opts.lambda_floor, "Lower bound on lambda");

  auto* loss_cmd = app.add_subcommand("loss", "Representation loss against a ground truth");
  std::string rep_path, gt_path, kind_name = "ours";
  bool loss_grad = false, check_flip = false;
  loss_cmd->add_option("--rep", rep_path, "Prediction JSON path")->required();
  loss_cmd->add_option("--gt", gt_path, "Ground-truth rotation JSON path")->required();
  loss_cmd->add_option("--kind", kind_name, "ours|rotmat|quat");
  loss_cmd->add_flag("--grad", loss_grad, "Also emit the loss gradient");
  loss_cmd->add_flag("--check-flip", check_flip, "Also emit the loss against the flipped GT");

  auto* demo_cmd = app.add_subcommand("demo-field", "Train a tiny field regressor on a scene");
  std::string scene_path, demo_kind = "ours", field_csv;
  int epochs = 300;
  demo_cmd->add_option("--scene", scene_path, "Scene config JSON path")->required();
  demo_cmd->add_option("--kind", demo_kind, "ours|rotmat|quat|all");
  demo_cmd->add_option("--epochs", epochs, "Training epochs");
  demo_cmd->add_option("--field-csv", field_csv, "Also dump the per-cell field CSV here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    g.quad.validate();
    if (sample_cmd->parsed()) {
      run_sample(g, dist_path, sample_count);
    } else if (normconst_cmd->parsed()) {
      run_normconst(g, lambda_from_flag(lambda_values), with_grad);
    } else if (percentile_cmd->parsed()) {
      run_percentile(g, lambda_from_flag(perc_lambda), p, empirical, perc_n);
    } else if (fit_cmd->parsed()) {
      run_fit(g, samples_path, fit_opts);
    } else if (loss_cmd->parsed()) {
      run_loss(g, rep_path, gt_path, kind_name, loss_grad, check_flip);
    } else if (demo_cmd->parsed()) {
      run_demo_field(g, scene_path, demo_kind, epochs, field_csv);
    }
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
