#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <string>
#include <vector>

#include "ddkl/denoiser.hpp"
#include "ddkl/gff.hpp"
#include "ddkl/kernels.hpp"
#include "ddkl/multires.hpp"
#include "ddkl/parallel.hpp"
#include "ddkl/rng.hpp"
#include "ddkl/schedules.hpp"
#include "ddkl/toydata.hpp"

using namespace ddkl;

namespace {

double seconds(const std::function<void()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  fn();
  const auto t1 = std::chrono::steady_clock::now();
  return std::chrono::duration<double>(t1 - t0).count();
}

void report(const char* name, double serial, double parallel, bool equal) {
  std::printf("%-28s serial %8.3fs  parallel %8.3fs  speedup %5.2fx  equal=%s\n", name,
              serial, parallel, serial / parallel, equal ? "yes" : "NO");
}

}  // namespace

int main(int argc, char** argv) {
  int scale = 1;
  if (argc > 1) scale = std::max(1, std::atoi(argv[1]));
  std::printf("thread cap: %d (set DDKL_THREADS to change)\n", thread_cap());

  {
    // spin the thread pool up once so first-region costs stay out of the timings
    const auto cov = SpectralCovariance::build(32, 1.0);
    (void)cov.sample_batch(2000, 1);
    (void)cov.sample_batch_serial(200, 1);
  }

  {
    const auto cov = SpectralCovariance::build(32, 1.0);
    const int count = 20000 * scale;
    std::vector<std::vector<double>> a, b;
    const double ts = seconds([&] { a = cov.sample_batch_serial(count, 7); });
    const double tp = seconds([&] { b = cov.sample_batch(count, 7); });
    report("gff sample batch 32x32", ts, tp, a == b);
  }
  {
    Rng rng(3);
    Image img(512, 512, 3);
    for (double& v : img.data) v = rng.uniform();
    Pyramid ps, pp;
    const int reps = 20 * scale;
    const double ts = seconds([&] {
      for (int r = 0; r < reps; ++r) ps = decompose_serial(img, 4, TransformKind::Unimodular);
    });
    const double tp = seconds([&] {
      for (int r = 0; r < reps; ++r) pp = decompose(img, 4, TransformKind::Unimodular);
    });
    const bool equal = ps.coarsest.data == pp.coarsest.data &&
                       ps.details[0].data == pp.details[0].data;
    report("pyramid decompose 512^2", ts, tp, equal);
  }
  {
    // batched loss gradient; the parallel path is the library default, the
    // serial reference is the same call under a 1-thread cap
    const auto sched = make_linear_beta(1000, 1e-4, 0.02);
    const VPProcess proc{sched, identity_cov()};
    MlpDenoiser d = MlpDenoiser::create(2, 0, 32, {128, 128, 128}, 5);
    std::vector<std::vector<double>> batch;
    Rng rng(11);
    for (int i = 0; i < 256; ++i) batch.push_back(sample_eight_gaussians(rng));
    const int reps = 20 * scale;
    LossResult la, lb;
    const double tp = seconds([&] {
      for (int r = 0; r < reps; ++r) {
        Rng lr(101);
        la = loss_noise_matching(d, proc, batch, lr);
      }
    });
    set_thread_cap(1);
    const double ts = seconds([&] {
      for (int r = 0; r < reps; ++r) {
        Rng lr(101);
        lb = loss_noise_matching(d, proc, batch, lr);
      }
    });
    set_thread_cap(0);
    report("batch loss grad 256x", ts, tp, la.grad == lb.grad && la.loss == lb.loss);
  }
  return 0;
}
