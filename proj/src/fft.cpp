#include "levygibbs/fft.hpp"

#include <fftw3.h>

#include <map>
#include <mutex>
#include <stdexcept>
#include <utility>

namespace levygibbs::fft {

namespace {

class PlanCache
{
public:
    ~PlanCache()
    {
        for (auto& [key, plan] : plans_)
            fftw_destroy_plan(plan);
    }

    fftw_plan get(std::size_t n, int sign)
    {
        std::lock_guard lock(mutex_);
        auto it = plans_.find({n, sign});
        if (it != plans_.end())
            return it->second;
        // Dummy buffer only for planning; FFTW_UNALIGNED lets us execute on any array.
        auto* buf = fftw_alloc_complex(n);
        fftw_plan plan = fftw_plan_dft_1d(static_cast<int>(n), buf, buf, sign,
                                          FFTW_ESTIMATE | FFTW_UNALIGNED);
        fftw_free(buf);
        if (!plan)
            throw std::runtime_error("fftw planning failed");
        plans_.emplace(std::make_pair(n, sign), plan);
        return plan;
    }

private:
    std::mutex mutex_;
    std::map<std::pair<std::size_t, int>, fftw_plan> plans_;
};

PlanCache& cache()
{
    static PlanCache c;
    return c;
}

void run(cplx* data, std::size_t n, int sign)
{
    if (n <= 1)
        return;
    auto plan = cache().get(n, sign);
    auto* p = reinterpret_cast<fftw_complex*>(data);
    fftw_execute_dft(plan, p, p);
}

} // namespace

void forward(cplx* data, std::size_t n) { run(data, n, FFTW_FORWARD); }
void backward(cplx* data, std::size_t n) { run(data, n, FFTW_BACKWARD); }

std::size_t good_size(std::size_t n)
{
    if (n <= 1)
        return 1;
    for (std::size_t m = n;; ++m) {
        std::size_t r = m;
        for (std::size_t f : {2u, 3u, 5u})
            while (r % f == 0)
                r /= f;
        if (r == 1)
            return m;
    }
}

} // namespace levygibbs::fft
