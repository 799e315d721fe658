// Heat and Poisson scaling fits for f_s(x) = |x|^s times a flat-top cutoff
// under the Hermite operator. The fitted slopes should track -k + s/2 (heat)
// and -k_P + s (Poisson).
#include <cstdio>
#include <string>

#include <schrolip/families.hpp>
#include <schrolip/lipschitz.hpp>

using namespace schrolip;

int main() {
  Grid g(1, 4.0, 2049);
  auto e = SemigroupEngine::mehler(g);
  std::printf("%-6s %-4s %-10s %-10s %-4s %-10s %-10s\n", "s", "k", "heat", "predicted", "kP", "poisson", "predicted");
  for (double s : {0.5, 1.0, 1.5}) {
    auto f = builtin_function("abs-pow:" + std::to_string(s), g);
    int k = heat_order(s), kp = poisson_order(s);
    auto hf = heat_scaling_fit(e, f, k);
    auto pf = poisson_scaling_fit(e, f, std::max(kp, 2));
    std::printf("%-6.2f %-4d %-10.4f %-10.4f %-4d %-10.4f %-10.4f\n", s, k, hf.slope, -k + 0.5 * s, pf.order, pf.slope,
                -pf.order + s);
  }
}
