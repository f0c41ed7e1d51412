#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <string>

#include "ddkl/checkpoint.hpp"
#include "ddkl/config.hpp"
#include "ddkl/denoiser.hpp"
#include "ddkl/gff.hpp"
#include "ddkl/image.hpp"
#include "ddkl/kernels.hpp"
#include "ddkl/multires.hpp"
#include "ddkl/odeint.hpp"
#include "ddkl/samplers.hpp"
#include "ddkl/schedules.hpp"
#include "ddkl/toydata.hpp"
#include "ddkl/verify.hpp"

namespace fs = std::filesystem;
using namespace ddkl;

namespace {

using Vec = std::vector<double>;

// Config-file keys mirror long option names. Values act as defaults; explicit
// command-line flags win. Unknown keys are rejected by name.
struct ConfigBinding {
  std::map<std::string, std::function<void(const std::string&)>> setters;

  template <typename T>
  void bind(const std::string& key, T& target) {
    setters[key] = [&target](const std::string& v) {
      if constexpr (std::is_same_v<T, std::string>) {
        target = v;
      } else if constexpr (std::is_same_v<T, double>) {
        target = std::stod(v);
      } else if constexpr (std::is_same_v<T, int>) {
        target = std::stoi(v);
      } else if constexpr (std::is_same_v<T, uint64_t>) {
        target = std::stoull(v);
      }
    };
  }

  void apply(const std::string& path, const CLI::App& cmd) {
    const auto cfg = parse_config_file(path);
    for (const auto& [key, value] : cfg) {
      auto it = setters.find(key);
      if (it == setters.end()) {
        throw std::runtime_error("config: unknown key '" + key + "'");
      }
      // flags given on the command line keep priority
      if (cmd.count("--" + key) == 0) it->second(value);
    }
  }
};

void ensure_dir(const std::string& dir) {
  if (!dir.empty()) fs::create_directories(dir);
}

// ---------------------------------------------------------------- ode-demo

int cmd_ode_demo() {
  const OdeFn lin = [](const Vec& x, double t, const Vec&) { return Vec{2.0 * t}; };
  const OdeFn growth = [](const Vec& x, double t, const Vec&) { return Vec{2.0 * x[0] * t}; };

  std::printf("dx/dt = 2t, x(0) = 2, analytic x(1) = 3\n");
  std::printf("%-8s %-12s %-12s\n", "h", "euler", "rk4");
  for (double h : {0.25, 0.1, 0.05, 0.01}) {
    const double e = solve({lin, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, h}).x[0];
    const double r = solve({lin, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Rk4, h}).x[0];
    std::printf("%-8.3g %-12.6f %-12.6f\n", h, e, r);
  }

  std::printf("\ndx/dt = 2xt from x(0) = 3, euler iteration at h = 0.25\n");
  const auto traj = solve({growth, {3.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, 0.25}, true);
  for (const auto& [t, x] : traj.trajectory) {
    std::printf("x(%.2f) = %.4f\n", t, x[0]);
  }
  std::printf("euler h=0.25 value: %.4f\n", traj.x[0]);

  std::printf("\ndx/dt = 2xt along x(t) = 2 e^(t^2), analytic x(1) = 2e = 5.436\n");
  std::printf("%-8s %-12s %-12s\n", "h", "euler", "rk4");
  for (double h : {0.25, 0.1, 0.05, 0.01}) {
    const double e = solve({growth, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Euler, h}).x[0];
    const double r = solve({growth, {2.0}, 0.0, 1.0, {}}, {OdeMethod::Rk4, h}).x[0];
    std::printf("%-8.3g %-12.4f %-12.4f\n", h, e, r);
  }
  return 0;
}

// -------------------------------------------------------------------- tune

int cmd_tune(int D, double sigma1, double sigmaL, double target, double gamma_in,
             int langevin_T, int gff_n, double gff_gamma, const std::string& out_dir) {
  double gamma = gamma_in;
  double overlap_res = 0.0;
  if (gamma <= 1.0) {
    gamma = tune_gamma(D, target);
    overlap_res = std::abs(sigma_overlap(gamma, D) - target);
  } else {
    overlap_res = std::abs(sigma_overlap(gamma, D) - target);
  }
  const int L = tune_num_scales(sigma1, sigmaL, gamma);
  std::printf("gamma=%.6f\n", gamma);
  std::printf("overlap_residual=%.3e\n", overlap_res);
  std::printf("L=%d\n", L);

  double eps = 0.0;
  if (langevin_T > 0) {
    const CovPtr cov = (gff_n > 0) ? make_gff_cov(gff_n, gff_gamma) : identity_cov();
    eps = tune_langevin_eps(gamma, sigmaL, langevin_T, *cov);
    const auto tv = langevin_terminal_variance(gamma, eps, sigmaL, langevin_T, *cov);
    std::printf("langevin_eps=%.6e\n", eps);
    std::printf("terminal_ratio_mean=%.6f min=%.6f max=%.6f\n", tv.mean(), tv.min(), tv.max());
  }

  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream out(out_dir + "/tune.jsonl");
    out << "{\"gamma\":" << gamma << ",\"L\":" << L << ",\"overlap_residual\":" << overlap_res;
    if (langevin_T > 0) out << ",\"langevin_eps\":" << eps << ",\"T\":" << langevin_T;
    out << "}\n";
  }
  return 0;
}

// --------------------------------------------------------------------- gff

int cmd_gff(int n, double gamma, int count, uint64_t seed, const std::string& out_dir) {
  const auto cov = SpectralCovariance::build(n, gamma);
  std::printf("n=%d gamma=%.3f sigma_n=%.6e logdet_sqrt_sigma=%.6f\n", n, gamma,
              cov.sigma_n(), cov.flow_logdet_term());
  ensure_dir(out_dir);
  const auto batch = cov.sample_batch(count, derive_seed(seed, "gff_cli"));
  for (int i = 0; i < count; ++i) {
    Image img(n, n, 1);
    img.data = batch[i];
    char name[64];
    std::snprintf(name, sizeof(name), "gff_%03d", i);
    write_raw_f32(img, out_dir + "/" + name + ".f32");
    // display mapping: three standard deviations into [0,1]
    Image disp = img;
    for (double& v : disp.data) v = v / 6.0 + 0.5;
    write_pnm(disp, out_dir + "/" + name + ".pgm");
  }
  std::printf("wrote %d samples to %s\n", count, out_dir.c_str());
  return 0;
}

// ----------------------------------------------------------------- pyramid

int cmd_pyramid(const std::string& in_path, int levels, const std::string& kind_name,
                const std::string& out_dir) {
  const TransformKind kind =
      (kind_name == "haar") ? TransformKind::Haar : TransformKind::Unimodular;
  const Image img = read_pnm(in_path);
  const Pyramid pyr = decompose(img, levels, kind);
  ensure_dir(out_dir);

  std::ofstream report(out_dir + "/logdet_report.txt");
  report << "kind=" << kind_name << " levels=" << levels << "\n";
  double total = 0.0;
  for (size_t s = 0; s < pyr.details.size(); ++s) {
    const Image& det = pyr.details[s];
    const int coarse_dims = det.width * det.height * (det.channels / 3);
    const double term = logdet_term(kind, coarse_dims);
    total += term;
    report << "level " << s + 1 << " coarse_dims=" << coarse_dims << " logdet=" << term << "\n";

    write_raw_f32(det, out_dir + "/details_" + std::to_string(s + 1) + ".f32");
    Image disp = det;
    for (double& v : disp.data) v = 0.5 + 0.5 * v;
    // detail planes are written channel-0 only for display when multi-channel
    Image plane(det.width, det.height, 1);
    for (int y = 0; y < det.height; ++y) {
      for (int x = 0; x < det.width; ++x) plane.at(0, y, x) = disp.at(0, y, x);
    }
    write_pnm(plane, out_dir + "/details_" + std::to_string(s + 1) + ".pgm");
  }
  report << "total=" << total << "\n";
  write_pnm(pyr.coarsest, out_dir + "/coarsest.pgm");
  write_raw_f32(pyr.coarsest, out_dir + "/coarsest.f32");

  const Image back = reconstruct(pyr);
  double worst = 0.0;
  for (size_t i = 0; i < img.data.size(); ++i) {
    worst = std::max(worst, std::abs(back.data[i] - img.data[i]));
  }
  std::printf("levels=%d kind=%s logdet_total=%.6f roundtrip_max_err=%.3e\n", levels,
              kind_name.c_str(), pyr.logdet_total, worst);
  return 0;
}

// ------------------------------------------------------------------- train

struct TrainOpts {
  std::string data = "eight-gaussians";
  std::string loss = "noise";
  std::string process = "vp";
  std::string out_dir = "out_train";
  int L = 1000;
  double beta1 = 1e-4, betaL = 0.02;
  double sigma_min = 0.01, sigma_max = 5.0;
  int gff_n = 0;
  double gff_gamma = 1.0;
  int iters = 20000, batch = 64;
  double lr = 1e-3;
  double lr_final = -1.0;
  uint64_t seed = 0;
  // pulse video shape
  int frame_dim = 16, past = 2, cur = 2, future = 2;
  double p_mask = 0.5;
};

ScheduleDescriptor schedule_descriptor(const TrainOpts& o) {
  ScheduleDescriptor sd;
  sd.kind = (o.process == "ve") ? 1 : 0;
  sd.length = o.L;
  sd.a = (sd.kind == 1) ? o.sigma_min : o.beta1;
  sd.b = (sd.kind == 1) ? o.sigma_max : o.betaL;
  sd.cov_kind = o.gff_n > 0 ? 1 : 0;
  sd.gff_side = o.gff_n;
  sd.gff_gamma = o.gff_gamma;
  return sd;
}

CovPtr cov_from_descriptor(const ScheduleDescriptor& sd) {
  return sd.cov_kind == 1 ? make_gff_cov(sd.gff_side, sd.gff_gamma) : identity_cov();
}

VPProcess process_from_descriptor(const ScheduleDescriptor& sd) {
  if (sd.kind != 0) throw std::runtime_error("checkpoint: expected a vp schedule");
  VPProcess p;
  p.schedule = make_linear_beta(sd.length, sd.a, sd.b);
  p.cov = cov_from_descriptor(sd);
  return p;
}

VEProcess ve_process_from_descriptor(const ScheduleDescriptor& sd) {
  if (sd.kind != 1) throw std::runtime_error("checkpoint: expected a ve schedule");
  VEProcess p;
  p.schedule = make_geometric_sigma(sd.a, sd.b, sd.length);
  p.cov = cov_from_descriptor(sd);
  return p;
}

int cmd_train(const TrainOpts& o) {
  const ScheduleDescriptor sd = schedule_descriptor(o);
  const bool ve = sd.kind == 1;
  if (ve && o.loss != "noise") {
    throw std::runtime_error("train: the ve process pairs with the plain noise loss");
  }
  const VPProcess proc = ve ? VPProcess{make_linear_beta(2, 0.1, 0.2), identity_cov()}
                            : process_from_descriptor(sd);
  const VEProcess ve_proc = ve ? ve_process_from_descriptor(sd)
                               : VEProcess{make_geometric_sigma(0.1, 1.0, 2), identity_cov()};
  const int emb = 32;
  const std::vector<int> hidden = {128, 128, 128};

  MlpDenoiser d;
  MaskConfig mask_cfg;
  const bool masked = o.loss == "masked";
  if (masked) {
    mask_cfg = MaskConfig{o.past, o.cur, o.future, o.p_mask, o.frame_dim};
    d = MlpDenoiser::create(o.cur * o.frame_dim, (o.past + o.future) * o.frame_dim, emb,
                            hidden, derive_seed(o.seed, "init"));
  } else {
    d = MlpDenoiser::create(2, 0, emb, hidden, derive_seed(o.seed, "init"));
  }

  NiVariant variant = NiVariant::A;
  if (o.loss == "ni-b") variant = NiVariant::B;
  if (o.loss == "ni-c") variant = NiVariant::C;

  const LossStepFn step = [&](Rng& rng) {
    if (masked) {
      std::vector<VideoWindow> batch;
      batch.reserve(o.batch);
      for (int b = 0; b < o.batch; ++b) {
        batch.push_back(sample_pulse_window(rng, o.past, o.cur, o.future, o.frame_dim));
      }
      return loss_masked_conditional(d, proc, batch, mask_cfg, rng);
    }
    std::vector<Vec> batch;
    batch.reserve(o.batch);
    for (int b = 0; b < o.batch; ++b) batch.push_back(sample_eight_gaussians(rng));
    if (ve) return loss_noise_matching(d, ve_proc, batch, rng);
    if (o.loss == "noise") return loss_noise_matching(d, proc, batch, rng);
    return loss_ni(d, proc, batch, variant, rng);
  };

  TrainConfig tc;
  tc.lr = o.lr;
  tc.lr_final = o.lr_final;
  tc.batch_size = o.batch;
  tc.iterations = o.iters;
  tc.seed = o.seed;
  const TrainResult tr = train(d.net.params(), step, tc);

  ensure_dir(o.out_dir);
  std::ofstream csv(o.out_dir + "/loss.csv");
  csv << "iteration,loss\n";
  for (size_t i = 0; i < tr.loss_trace.size(); ++i) {
    csv << i + 1 << "," << tr.loss_trace[i] << "\n";
  }

  Checkpoint ck;
  ck.arch.data_dim = d.data_dim;
  ck.arch.cond_dim = d.cond_dim;
  ck.arch.emb_dim = d.emb_dim;
  for (int h : hidden) ck.arch.hidden.push_back(h);
  ck.sched = sd;
  ck.params.assign(d.net.params().begin(), d.net.params().end());
  save_checkpoint(ck, o.out_dir + "/model.ckpt");

  const double head = tr.loss_trace.empty() ? 0.0 : tr.loss_trace.front();
  const double tail = tr.loss_trace.empty() ? 0.0 : tr.loss_trace.back();
  std::printf("trained %d iterations, loss %.4f -> %.4f, wrote %s/model.ckpt\n", o.iters,
              head, tail, o.out_dir.c_str());
  return 0;
}

// ------------------------------------------------------------------ sample

int cmd_sample(const std::string& ckpt_path, const std::string& sampler, int steps,
               int count, uint64_t seed, double langevin_eps, int inner_steps,
               const std::string& out_dir) {
  const Checkpoint ck = load_checkpoint(ckpt_path);
  std::vector<int> hidden(ck.arch.hidden.begin(), ck.arch.hidden.end());
  MlpDenoiser d = MlpDenoiser::create(ck.arch.data_dim, ck.arch.cond_dim, ck.arch.emb_dim,
                                      hidden, 0);
  d.net.params().assign(ck.params.begin(), ck.params.end());
  if (ck.arch.cond_dim != 0) {
    throw std::runtime_error("sample: checkpoint is conditional, use the masked pipeline");
  }

  const int L = ck.sched.length;
  const Vec no_cond;

  if (sampler == "als" || sampler == "cas") {
    // VE reverse process driven by the eps model through the score relation
    const VEProcess ve = ve_process_from_descriptor(ck.sched);
    const ScoreFn score_fn = [&](const Vec& x, int i) {
      const Vec e = d.predict(x, static_cast<double>(i) / L, no_cond);
      Vec s = ve.cov->inv_sqrt_sigma(e);
      for (double& v : s) v /= -ve.schedule.sigma(i);
      return s;
    };
    double eps = langevin_eps;
    if (eps <= 0.0) {
      eps = tune_langevin_eps(ve.schedule.gamma, ve.schedule.sigma_min(),
                              sampler == "als" ? inner_steps : 1, *ve.cov);
    }
    ensure_dir(out_dir);
    std::ofstream csv(out_dir + "/samples.csv");
    for (int i = 0; i < count; ++i) {
      Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
      const Vec x = (sampler == "als")
                        ? annealed_langevin(ve, score_fn, inner_steps, eps,
                                            ck.arch.data_dim, rng).x
                        : consistent_annealed(ve, score_fn, eps, ck.arch.data_dim, rng).x;
      for (size_t j = 0; j < x.size(); ++j) csv << (j ? "," : "") << x[j];
      csv << "\n";
    }
    std::printf("wrote %d %s samples (eps=%.3e) to %s/samples.csv\n", count,
                sampler.c_str(), eps, out_dir.c_str());
    return 0;
  }

  const VPProcess proc = process_from_descriptor(ck.sched);
  SamplerSpec spec;
  spec.steps = make_substeps(L, steps);
  spec.seed = seed;
  if (sampler == "ancestral") {
    spec.kind = SamplerKind::AncestralTilde;
  } else if (sampler == "ancestral-beta") {
    spec.kind = SamplerKind::AncestralBeta;
  } else if (sampler == "ddim") {
    spec.kind = SamplerKind::Ddim;
  } else {
    throw std::runtime_error("sample: unknown sampler '" + sampler + "'");
  }

  const EpsFn eps_fn = [&](const Vec& x, int t) {
    return d.predict(x, static_cast<double>(t) / L, no_cond);
  };
  ensure_dir(out_dir);
  std::ofstream csv(out_dir + "/samples.csv");
  for (int i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, static_cast<uint64_t>(i)));
    const Vec x = sample_chain(proc, spec, eps_fn, ck.arch.data_dim, rng).x;
    for (size_t j = 0; j < x.size(); ++j) csv << (j ? "," : "") << x[j];
    csv << "\n";
  }
  std::printf("wrote %d %s samples to %s/samples.csv\n", count, sampler.c_str(),
              out_dir.c_str());
  return 0;
}

// ------------------------------------------------------------------ verify

int cmd_verify(const std::string& module, uint64_t seed, const std::string& out_dir) {
  const auto results = run_verify(module, seed);
  int failures = 0;
  for (const auto& r : results) {
    std::printf("[%s] %-12s %-48s measured=%.3e tol=%.3e\n", r.pass ? "PASS" : "FAIL",
                r.module.c_str(), r.name.c_str(), r.measured, r.tolerance);
    if (!r.pass) ++failures;
  }
  std::printf("%zu checks, %d failures\n", results.size(), failures);
  if (!out_dir.empty()) {
    ensure_dir(out_dir);
    std::ofstream out(out_dir + "/verify.jsonl");
    for (const auto& r : results) {
      out << "{\"module\":\"" << r.module << "\",\"name\":\"" << r.name
          << "\",\"measured\":" << r.measured << ",\"tolerance\":" << r.tolerance
          << ",\"pass\":" << (r.pass ? "true" : "false") << "}\n";
    }
  }
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"score-based denoising diffusion toolkit"};
  app.require_subcommand(1);

  std::string config_path;

  // ode-demo
  auto* ode = app.add_subcommand("ode-demo", "print the worked integration examples");

  // tune
  int tune_D = 3072;
  double tune_s1 = 20.0, tune_sL = 0.01, tune_target = 0.5, tune_gamma_in = 0.0;
  int tune_T = 0, tune_gff_n = 0;
  double tune_gff_gamma = 1.0;
  std::string tune_out;
  auto* tune = app.add_subcommand("tune", "schedule constants and langevin step size");
  tune->add_option("--config", config_path, "key=value config file");
  tune->add_option("--D", tune_D, "data dimensionality");
  tune->add_option("--sigma1", tune_s1, "largest noise scale");
  tune->add_option("--sigmaL", tune_sL, "smallest noise scale");
  tune->add_option("--target", tune_target, "overlap target");
  tune->add_option("--gamma", tune_gamma_in, "skip root finding and use this ratio");
  tune->add_option("--langevin-T", tune_T, "inner step count; 0 skips eps tuning");
  tune->add_option("--gff-n", tune_gff_n, "field side for a gff covariance (0 = isotropic)");
  tune->add_option("--gff-gamma", tune_gff_gamma, "gff spectral exponent");
  tune->add_option("--out", tune_out, "directory for the jsonl report");

  // gff
  int gff_n = 32, gff_count = 4;
  double gff_gamma = 1.0;
  uint64_t gff_seed = 0;
  std::string gff_out = "out_gff";
  auto* gff = app.add_subcommand("gff", "sample gaussian free fields");
  gff->add_option("--config", config_path, "key=value config file");
  gff->add_option("--n", gff_n, "field side length");
  gff->add_option("--gamma", gff_gamma, "spectral exponent");
  gff->add_option("--count", gff_count, "number of samples");
  gff->add_option("--seed", gff_seed, "rng seed");
  gff->add_option("--out", gff_out, "output directory");

  // pyramid
  std::string pyr_in, pyr_kind = "unimodular", pyr_out = "out_pyramid";
  int pyr_levels = 3;
  auto* pyr = app.add_subcommand("pyramid", "multi-resolution decomposition");
  pyr->add_option("--config", config_path, "key=value config file");
  pyr->add_option("--in", pyr_in, "input pgm/ppm image")->required();
  pyr->add_option("--levels", pyr_levels, "number of levels S");
  pyr->add_option("--kind", pyr_kind, "haar or unimodular")
      ->check(CLI::IsMember({"haar", "unimodular"}));
  pyr->add_option("--out", pyr_out, "output directory");

  // train
  TrainOpts to;
  auto* tr = app.add_subcommand("train", "train a toy denoiser");
  tr->add_option("--config", config_path, "key=value config file");
  tr->add_option("--data", to.data, "eight-gaussians or pulse")
      ->check(CLI::IsMember({"eight-gaussians", "pulse"}));
  tr->add_option("--loss", to.loss, "noise, ni-a, ni-b, ni-c or masked")
      ->check(CLI::IsMember({"noise", "ni-a", "ni-b", "ni-c", "masked"}));
  tr->add_option("--process", to.process, "vp or ve")->check(CLI::IsMember({"vp", "ve"}));
  tr->add_option("--sigma-min", to.sigma_min, "smallest ve scale");
  tr->add_option("--sigma-max", to.sigma_max, "largest ve scale");
  tr->add_option("--L", to.L, "schedule length");
  tr->add_option("--beta1", to.beta1, "first beta");
  tr->add_option("--betaL", to.betaL, "last beta");
  tr->add_option("--gff-n", to.gff_n, "gff side (0 = isotropic)");
  tr->add_option("--gff-gamma", to.gff_gamma, "gff spectral exponent");
  tr->add_option("--iters", to.iters, "training iterations");
  tr->add_option("--batch", to.batch, "batch size");
  tr->add_option("--lr", to.lr, "step size");
  tr->add_option("--lr-final", to.lr_final, "linearly decay to this step size (< 0 keeps it constant)");
  tr->add_option("--seed", to.seed, "rng seed");
  tr->add_option("--frame-dim", to.frame_dim, "pulse video frame dimension");
  tr->add_option("--past", to.past, "past frames");
  tr->add_option("--cur", to.cur, "current frames");
  tr->add_option("--future", to.future, "future frames");
  tr->add_option("--pmask", to.p_mask, "mask probability");
  tr->add_option("--out", to.out_dir, "output directory");

  // sample
  std::string sm_ckpt, sm_sampler = "ddim", sm_out = "out_sample";
  int sm_steps = 100, sm_count = 1000, sm_inner = 5;
  uint64_t sm_seed = 0;
  double sm_eps = 0.0;
  auto* sm = app.add_subcommand("sample", "sample from a trained checkpoint");
  sm->add_option("--config", config_path, "key=value config file");
  sm->add_option("--ckpt", sm_ckpt, "checkpoint path")->required();
  sm->add_option("--sampler", sm_sampler, "ancestral, ancestral-beta, ddim, als or cas")
      ->check(CLI::IsMember({"ancestral", "ancestral-beta", "ddim", "als", "cas"}));
  sm->add_option("--steps", sm_steps, "number of reverse steps");
  sm->add_option("--count", sm_count, "number of samples");
  sm->add_option("--seed", sm_seed, "rng seed");
  sm->add_option("--eps", sm_eps, "langevin step constant (0 = tune)");
  sm->add_option("--inner-steps", sm_inner, "langevin inner steps per level");
  sm->add_option("--out", sm_out, "output directory");

  // verify
  std::string ver_module, ver_out;
  uint64_t ver_seed = 0;
  auto* ver = app.add_subcommand("verify", "run the module invariant suites");
  ver->add_option("--config", config_path, "key=value config file");
  ver->add_option("--module", ver_module, "single module (default: all)");
  ver->add_option("--seed", ver_seed, "rng seed");
  ver->add_option("--out", ver_out, "directory for the jsonl report");

  CLI11_PARSE(app, argc, argv);

  try {
    if (app.got_subcommand(ode)) return cmd_ode_demo();
    if (app.got_subcommand(tune)) {
      if (!config_path.empty()) {
        ConfigBinding b;
        b.bind("D", tune_D);
        b.bind("sigma1", tune_s1);
        b.bind("sigmaL", tune_sL);
        b.bind("target", tune_target);
        b.bind("gamma", tune_gamma_in);
        b.bind("langevin-T", tune_T);
        b.bind("gff-n", tune_gff_n);
        b.bind("gff-gamma", tune_gff_gamma);
        b.bind("out", tune_out);
        b.apply(config_path, *tune);
      }
      return cmd_tune(tune_D, tune_s1, tune_sL, tune_target, tune_gamma_in, tune_T,
                      tune_gff_n, tune_gff_gamma, tune_out);
    }
    if (app.got_subcommand(gff)) {
      if (!config_path.empty()) {
        ConfigBinding b;
        b.bind("n", gff_n);
        b.bind("gamma", gff_gamma);
        b.bind("count", gff_count);
        b.bind("seed", gff_seed);
        b.bind("out", gff_out);
        b.apply(config_path, *gff);
      }
      return cmd_gff(gff_n, gff_gamma, gff_count, gff_seed, gff_out);
    }
    if (app.got_subcommand(pyr)) return cmd_pyramid(pyr_in, pyr_levels, pyr_kind, pyr_out);
    if (app.got_subcommand(tr)) {
      if (!config_path.empty()) {
        ConfigBinding b;
        b.bind("data", to.data);
        b.bind("loss", to.loss);
        b.bind("process", to.process);
        b.bind("sigma-min", to.sigma_min);
        b.bind("sigma-max", to.sigma_max);
        b.bind("L", to.L);
        b.bind("beta1", to.beta1);
        b.bind("betaL", to.betaL);
        b.bind("gff-n", to.gff_n);
        b.bind("gff-gamma", to.gff_gamma);
        b.bind("iters", to.iters);
        b.bind("batch", to.batch);
        b.bind("lr", to.lr);
        b.bind("lr-final", to.lr_final);
        b.bind("seed", to.seed);
        b.bind("frame-dim", to.frame_dim);
        b.bind("past", to.past);
        b.bind("cur", to.cur);
        b.bind("future", to.future);
        b.bind("pmask", to.p_mask);
        b.bind("out", to.out_dir);
        b.apply(config_path, *tr);
      }
      return cmd_train(to);
    }
    if (app.got_subcommand(sm)) {
      return cmd_sample(sm_ckpt, sm_sampler, sm_steps, sm_count, sm_seed, sm_eps, sm_inner,
                        sm_out);
    }
    if (app.got_subcommand(ver)) return cmd_verify(ver_module, ver_seed, ver_out);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
