#include "specflow/util.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

namespace specflow::util {

namespace {
int g_max_threads = 0;
}

void set_max_threads(int n) { g_max_threads = n < 0 ? 0 : n; }

int max_threads() {
  if (g_max_threads > 0) return g_max_threads;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

void parallel_for(std::size_t count, const std::function<void(std::size_t)>& fn) {
  const int nt = std::min<std::size_t>(count, static_cast<std::size_t>(max_threads()));
  if (nt <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  pool.reserve(nt);
  std::exception_ptr err;
  std::mutex err_mutex;
  for (int t = 0; t < nt; ++t) {
    pool.emplace_back([&] {
      for (;;) {
        std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
          return;
        }
      }
    });
  }
  for (auto& th : pool) th.join();
  if (err) std::rethrow_exception(err);
}

Quadrature gauss_legendre_01(int npoints) {
  if (npoints < 1) throw ContractViolation("gauss_legendre_01: npoints must be >= 1");
  // Newton iteration on Legendre polynomials over [-1,1], then map to [0,1].
  Quadrature q;
  q.nodes.resize(npoints);
  q.weights.resize(npoints);
  const int m = (npoints + 1) / 2;
  for (int i = 0; i < m; ++i) {
    double x = std::cos(M_PI * (i + 0.75) / (npoints + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = x;
      if (npoints == 1) p1 = x;  // P_1
      for (int j = 2; j <= npoints; ++j) {
        double p2 = ((2.0 * j - 1.0) * x * p1 - (j - 1.0) * p0) / j;
        p0 = p1;
        p1 = p2;
      }
      double pn = (npoints == 1) ? x : p1;
      double pn1 = (npoints == 1) ? 1.0 : p0;
      pp = npoints * (x * pn - pn1) / (x * x - 1.0);
      double dx = pn / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    q.nodes[i] = 0.5 * (1.0 - x);
    q.nodes[npoints - 1 - i] = 0.5 * (1.0 + x);
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    q.weights[i] = 0.5 * w;
    q.weights[npoints - 1 - i] = 0.5 * w;
  }
  return q;
}

std::vector<double> log_grid(double lo, double hi, int count) {
  if (lo <= 0 || hi <= 0 || count < 1) throw ContractViolation("log_grid: bad arguments");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  const double step = (std::log(hi) - std::log(lo)) / (count - 1);
  for (int i = 0; i < count; ++i) g[i] = std::exp(std::log(lo) + step * i);
  return g;
}

std::vector<double> lin_grid(double lo, double hi, int count) {
  if (count < 1) throw ContractViolation("lin_grid: bad arguments");
  std::vector<double> g(count);
  if (count == 1) {
    g[0] = lo;
    return g;
  }
  for (int i = 0; i < count; ++i) g[i] = lo + (hi - lo) * i / (count - 1);
  return g;
}

double fit_slope(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw ContractViolation("fit_slope: need >= 2 points");
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= x.size();
  my /= y.size();
  double cov = 0, var = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    cov += (x[i] - mx) * (y[i] - my);
    var += (x[i] - mx) * (x[i] - mx);
  }
  return cov / var;
}

}  // namespace specflow::util
