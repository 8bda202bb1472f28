#include "filtnoise/fft.hpp"

#include <fftw3.h>

#include <cstring>
#include <map>
#include <mutex>

namespace filtnoise {

namespace {

std::mutex plan_mutex;

// Shared 1D c2c plans per (length, sign), executed on caller-owned arrays
// via fftw_execute_dft (thread-safe once created).
fftw_plan plan_1d(int n, int sign) {
    static std::map<std::pair<int, int>, fftw_plan> cache;
    std::lock_guard<std::mutex> lock(plan_mutex);
    auto key = std::make_pair(n, sign);
    auto it = cache.find(key);
    if (it != cache.end()) return it->second;
    fftw_complex* tmp = fftw_alloc_complex(static_cast<std::size_t>(n));
    fftw_plan p = fftw_plan_dft_1d(n, tmp, tmp, sign, FFTW_ESTIMATE);
    fftw_free(tmp);
    cache.emplace(key, p);
    return p;
}

struct FftwBuf {
    fftw_complex* p;
    explicit FftwBuf(std::size_t n) : p(fftw_alloc_complex(n)) {}
    ~FftwBuf() { fftw_free(p); }
};

}  // namespace

int next_fast_len(int n) {
    if (n <= 1) return 1;
    for (int m = n;; ++m) {
        int r = m;
        while (r % 2 == 0) r /= 2;
        while (r % 3 == 0) r /= 3;
        while (r % 5 == 0) r /= 5;
        if (r == 1) return m;
    }
}

ArrayXd fft_convolve_full(const ArrayXd& a, const ArrayXd& b) {
    const auto na = static_cast<int>(a.size());
    const auto nb = static_cast<int>(b.size());
    const int nout = na + nb - 1;
    const int nfft = next_fast_len(nout);
    fftw_plan fwd = plan_1d(nfft, FFTW_FORWARD);
    fftw_plan bwd = plan_1d(nfft, FFTW_BACKWARD);

    FftwBuf fa(static_cast<std::size_t>(nfft)), fb(static_cast<std::size_t>(nfft));
    for (int i = 0; i < nfft; ++i) {
        fa.p[i][0] = i < na ? a[i] : 0.0;
        fa.p[i][1] = 0.0;
        fb.p[i][0] = i < nb ? b[i] : 0.0;
        fb.p[i][1] = 0.0;
    }
    fftw_execute_dft(fwd, fa.p, fa.p);
    fftw_execute_dft(fwd, fb.p, fb.p);
    for (int i = 0; i < nfft; ++i) {
        const double re = fa.p[i][0] * fb.p[i][0] - fa.p[i][1] * fb.p[i][1];
        const double im = fa.p[i][0] * fb.p[i][1] + fa.p[i][1] * fb.p[i][0];
        fa.p[i][0] = re;
        fa.p[i][1] = im;
    }
    fftw_execute_dft(bwd, fa.p, fa.p);
    ArrayXd out(nout);
    const double scale = 1.0 / static_cast<double>(nfft);
    for (int i = 0; i < nout; ++i) out[i] = fa.p[i][0] * scale;
    return out;
}

ArrayXd autocovariance_fft(const ArrayXd& x, int max_lag) {
    const auto n = static_cast<int>(x.size());
    const double mean = x.mean();
    const int nfft = next_fast_len(n + max_lag + 1);
    fftw_plan fwd = plan_1d(nfft, FFTW_FORWARD);
    fftw_plan bwd = plan_1d(nfft, FFTW_BACKWARD);

    FftwBuf f(static_cast<std::size_t>(nfft));
    for (int i = 0; i < nfft; ++i) {
        f.p[i][0] = i < n ? x[i] - mean : 0.0;
        f.p[i][1] = 0.0;
    }
    fftw_execute_dft(fwd, f.p, f.p);
    for (int i = 0; i < nfft; ++i) {
        f.p[i][0] = f.p[i][0] * f.p[i][0] + f.p[i][1] * f.p[i][1];
        f.p[i][1] = 0.0;
    }
    fftw_execute_dft(bwd, f.p, f.p);
    ArrayXd out(max_lag + 1);
    const double scale = 1.0 / (static_cast<double>(nfft) * static_cast<double>(n));
    for (int k = 0; k <= max_lag; ++k) out[k] = f.p[k][0] * scale;
    return out;
}

Fft2::Fft2(int n) : n_(n) {
    std::lock_guard<std::mutex> lock(plan_mutex);
    const auto nn = static_cast<std::size_t>(n) * static_cast<std::size_t>(n);
    fftw_complex* b = fftw_alloc_complex(nn);
    buf_ = b;
    fwd_ = fftw_plan_dft_2d(n, n, b, b, FFTW_FORWARD, FFTW_MEASURE);
    bwd_ = fftw_plan_dft_2d(n, n, b, b, FFTW_BACKWARD, FFTW_MEASURE);
}

Fft2::~Fft2() {
    std::lock_guard<std::mutex> lock(plan_mutex);
    fftw_destroy_plan(static_cast<fftw_plan>(fwd_));
    fftw_destroy_plan(static_cast<fftw_plan>(bwd_));
    fftw_free(static_cast<fftw_complex*>(buf_));
}

void Fft2::forward(const ArrayXXcd& in, ArrayXXcd& out) {
    auto* b = static_cast<fftw_complex*>(buf_);
    const auto nn = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    std::memcpy(b, in.data(), nn * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(fwd_));
    out.resize(n_, n_);
    const double scale = 1.0 / static_cast<double>(nn);
    auto* o = out.data();
    for (std::size_t i = 0; i < nn; ++i) o[i] = Complex(b[i][0], b[i][1]) * scale;
}

void Fft2::backward(const ArrayXXcd& in, ArrayXXcd& out) {
    auto* b = static_cast<fftw_complex*>(buf_);
    const auto nn = static_cast<std::size_t>(n_) * static_cast<std::size_t>(n_);
    std::memcpy(b, in.data(), nn * sizeof(fftw_complex));
    fftw_execute(static_cast<fftw_plan>(bwd_));
    out.resize(n_, n_);
    auto* o = out.data();
    for (std::size_t i = 0; i < nn; ++i) o[i] = Complex(b[i][0], b[i][1]);
}

}  // namespace filtnoise
