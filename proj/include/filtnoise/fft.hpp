#pragma once

#include "filtnoise/common.hpp"

struct fftw_plan_s;

namespace filtnoise {

/// Smallest 5-smooth integer >= n (friendly FFT length).
int next_fast_len(int n);

/// Linear convolution of two real sequences, output length a.size()+b.size()-1.
ArrayXd fft_convolve_full(const ArrayXd& a, const ArrayXd& b);

/// Biased autocovariance c_k = (1/n) sum_i (x_i - m)(x_{i+k} - m) for
/// k = 0..max_lag, computed via zero-padded FFT.
ArrayXd autocovariance_fft(const ArrayXd& x, int max_lag);

/// Complex-to-complex 2D transforms on an n x n grid. Coefficient
/// convention: backward() sums the series (unnormalized), forward() applies
/// the 1/n^2 factor, so forward(backward(c)) == c.
class Fft2 {
public:
    explicit Fft2(int n);
    ~Fft2();
    Fft2(const Fft2&) = delete;
    Fft2& operator=(const Fft2&) = delete;

    void forward(const ArrayXXcd& in, ArrayXXcd& out);
    void backward(const ArrayXXcd& in, ArrayXXcd& out);
    int n() const { return n_; }

private:
    int n_;
    void* buf_;
    fftw_plan_s* fwd_;
    fftw_plan_s* bwd_;
};

}  // namespace filtnoise
