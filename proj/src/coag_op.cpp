#include "coagstat/coag_op.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <stdexcept>
#include <thread>
#include <utility>

namespace coagstat {

namespace {

constexpr std::size_t kChunk = 8192;

// Runs fn(chunk_index) for every chunk; chunks are fixed-size slices of the
// entry array, so the partition does not depend on the worker count.
template <class Fn>
void run_chunks(std::size_t n_chunks, int workers, Fn&& fn) {
  workers = std::max(1, std::min<int>(workers, static_cast<int>(n_chunks)));
  if (workers == 1) {
    for (std::size_t c = 0; c < n_chunks; ++c) fn(c);
    return;
  }
  std::atomic<std::size_t> next{0};
  auto drain = [&] {
    for (;;) {
      const std::size_t c = next.fetch_add(1);
      if (c >= n_chunks) return;
      fn(c);
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers) - 1);
  for (int w = 1; w < workers; ++w) pool.emplace_back(drain);
  drain();
  for (std::thread& t : pool) t.join();
}

std::size_t chunk_count(std::size_t entries) { return (entries + kChunk - 1) / kChunk; }

}  // namespace

PairTable build_pair_table(const Kernel& kernel, const Grid& grid) {
  PairTable table;
  const int n = grid.size();
  table.n = n;
  table.entries.reserve(static_cast<std::size_t>(n) * (n + 1) / 2);
  const std::vector<double>& piv = grid.pivots();
  const double top = piv.back();

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j <= i; ++j) {
      PairTable::Entry e;
      e.i = i;
      e.j = j;
      e.rate = kernel.eval(piv[static_cast<std::size_t>(i)], piv[static_cast<std::size_t>(j)]);
      if (!(e.rate >= 0.0) || !std::isfinite(e.rate))
        throw std::runtime_error("pair table: kernel produced a non-finite or negative rate");
      const double s = piv[static_cast<std::size_t>(i)] + piv[static_cast<std::size_t>(j)];
      e.sum_size = s;
      if (s > top) {
        e.target = -1;  // overflow: number and mass leave the domain
      } else {
        auto it = std::upper_bound(piv.begin(), piv.end(), s);
        int k = static_cast<int>(it - piv.begin()) - 1;
        if (k >= n - 1) k = n - 2;  // s == top lands on the last pivot pair
        const double xk = piv[static_cast<std::size_t>(k)];
        const double xk1 = piv[static_cast<std::size_t>(k) + 1];
        double w_hi = (s - xk) / (xk1 - xk);
        w_hi = std::clamp(w_hi, 0.0, 1.0);
        e.target = k;
        e.w_hi = w_hi;
        e.w_lo = 1.0 - w_hi;
      }
      table.entries.push_back(e);
    }
  }
  return table;
}

ApplyResult apply(const PairTable& table, const Grid& grid,
                  std::span<const double> phi, int workers) {
  const int n = table.n;
  if (static_cast<int>(phi.size()) != n || grid.size() != n)
    throw std::invalid_argument("apply: inputs not aligned with table");

  const std::size_t nc = chunk_count(table.entries.size());
  const std::size_t un = static_cast<std::size_t>(n);

  // Particle numbers per bin.
  std::vector<double> num(un);
  for (std::size_t i = 0; i < un; ++i) num[i] = phi[i] * grid.width(static_cast<int>(i));

  std::vector<double> gain_part(nc * un, 0.0);
  std::vector<double> loss_part(nc * un, 0.0);
  std::vector<double> ovf_n_part(nc, 0.0);
  std::vector<double> ovf_m_part(nc, 0.0);

  run_chunks(nc, workers, [&](std::size_t c) {
    double* gain = gain_part.data() + c * un;
    double* loss = loss_part.data() + c * un;
    double ovf_n = 0.0, ovf_m = 0.0;
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(begin + kChunk, table.entries.size());
    for (std::size_t idx = begin; idx < end; ++idx) {
      const PairTable::Entry& e = table.entries[idx];
      const std::size_t i = static_cast<std::size_t>(e.i);
      const std::size_t j = static_cast<std::size_t>(e.j);
      if (e.i != e.j) {
        loss[i] += e.rate * num[j];
        loss[j] += e.rate * num[i];
      } else {
        loss[i] += e.rate * num[i];
      }
      const double mult = (e.i == e.j) ? 0.5 : 1.0;
      // (num_i * num_j) first: relabeling (i,j)->(j,i) stays bit-exact
      const double events = mult * e.rate * (num[i] * num[j]);
      if (e.target < 0) {
        ovf_n += events;
        ovf_m += events * e.sum_size;
      } else {
        gain[static_cast<std::size_t>(e.target)] += events * e.w_lo;
        gain[static_cast<std::size_t>(e.target) + 1] += events * e.w_hi;
      }
    }
    ovf_n_part[c] = ovf_n;
    ovf_m_part[c] = ovf_m;
  });

  ApplyResult out;
  out.gain.assign(un, 0.0);
  out.loss_rate.assign(un, 0.0);
  out.dphi.assign(un, 0.0);
  for (std::size_t c = 0; c < nc; ++c) {
    const double* gain = gain_part.data() + c * un;
    const double* loss = loss_part.data() + c * un;
    for (std::size_t i = 0; i < un; ++i) {
      out.gain[i] += gain[i];
      out.loss_rate[i] += loss[i];
    }
    out.overflow_number += ovf_n_part[c];
    out.overflow_mass += ovf_m_part[c];
  }
  for (std::size_t i = 0; i < un; ++i) {
    out.gain[i] /= grid.width(static_cast<int>(i));
    out.dphi[i] = out.gain[i] - phi[i] * out.loss_rate[i];
  }
  return out;
}

WeakTestFunction WeakTestFunction::with_constant(std::vector<double> v, double boundary) {
  WeakTestFunction f;
  f.values = std::move(v);
  f.overflow_value = [boundary](double) { return boundary; };
  return f;
}

WeakTestFunction WeakTestFunction::with_sum_size(std::vector<double> v) {
  WeakTestFunction f;
  f.values = std::move(v);
  f.overflow_value = [](double s) { return s; };
  return f;
}

double weak_form(const PairTable& table, const Grid& grid,
                 std::span<const double> phi, const WeakTestFunction& theta,
                 int workers) {
  const int n = table.n;
  if (static_cast<int>(phi.size()) != n ||
      static_cast<int>(theta.values.size()) != n)
    throw std::invalid_argument("weak_form: inputs not aligned with table");

  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> num(un);
  for (std::size_t i = 0; i < un; ++i) num[i] = phi[i] * grid.width(static_cast<int>(i));

  const std::size_t nc = chunk_count(table.entries.size());
  std::vector<double> part(nc, 0.0);
  const std::vector<double>& th = theta.values;

  run_chunks(nc, workers, [&](std::size_t c) {
    double acc = 0.0;
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(begin + kChunk, table.entries.size());
    for (std::size_t idx = begin; idx < end; ++idx) {
      const PairTable::Entry& e = table.entries[idx];
      const double mult = (e.i == e.j) ? 0.5 : 1.0;
      const double nn = mult * e.rate * (num[static_cast<std::size_t>(e.i)] *
                                          num[static_cast<std::size_t>(e.j)]);
      double value_at_sum;
      if (e.target < 0) {
        value_at_sum = theta.overflow_value(e.sum_size);
      } else {
        value_at_sum = e.w_lo * th[static_cast<std::size_t>(e.target)] +
                       e.w_hi * th[static_cast<std::size_t>(e.target) + 1];
      }
      acc += nn * (value_at_sum - th[static_cast<std::size_t>(e.i)] -
                   th[static_cast<std::size_t>(e.j)]);
    }
    part[c] = acc;
  });

  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

double total_coagulation_rate(const PairTable& table, const Grid& grid,
                              std::span<const double> phi, int workers) {
  const int n = table.n;
  const std::size_t un = static_cast<std::size_t>(n);
  std::vector<double> num(un);
  for (std::size_t i = 0; i < un; ++i) num[i] = phi[i] * grid.width(static_cast<int>(i));

  const std::size_t nc = chunk_count(table.entries.size());
  std::vector<double> part(nc, 0.0);
  run_chunks(nc, workers, [&](std::size_t c) {
    double acc = 0.0;
    const std::size_t begin = c * kChunk;
    const std::size_t end = std::min(begin + kChunk, table.entries.size());
    for (std::size_t idx = begin; idx < end; ++idx) {
      const PairTable::Entry& e = table.entries[idx];
      const double mult = (e.i == e.j) ? 0.5 : 1.0;
      acc += mult * e.rate * (num[static_cast<std::size_t>(e.i)] *
                              num[static_cast<std::size_t>(e.j)]);
    }
    part[c] = acc;
  });
  double total = 0.0;
  for (double p : part) total += p;
  return total;
}

double overflow_weighted(const PairTable& table, const Grid& grid,
                         std::span<const double> phi,
                         std::span<const double> theta) {
  const std::size_t un = static_cast<std::size_t>(table.n);
  std::vector<double> num(un);
  for (std::size_t i = 0; i < un; ++i) num[i] = phi[i] * grid.width(static_cast<int>(i));
  double acc = 0.0;
  for (const PairTable::Entry& e : table.entries) {
    if (e.target >= 0) continue;
    const double mult = (e.i == e.j) ? 0.5 : 1.0;
    acc += mult * e.rate * (num[static_cast<std::size_t>(e.i)] *
                            num[static_cast<std::size_t>(e.j)]) *
           (theta[static_cast<std::size_t>(e.i)] + theta[static_cast<std::size_t>(e.j)]);
  }
  return acc;
}

}  // namespace coagstat
