#include <atomic>

#include "saekit/error.hpp"
#include "saekit/kernels.hpp"

namespace saekit::simd {

std::string_view to_string(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return "scalar";
    case Isa::Avx2: return "avx2";
    case Isa::Neon: return "neon";
  }
  return "unknown";
}

namespace {

const KernelTable* table_for(Isa isa) noexcept {
  switch (isa) {
    case Isa::Scalar: return &detail::scalar_table();
    case Isa::Avx2: return detail::avx2_table();
    case Isa::Neon: return detail::neon_table();
  }
  return nullptr;
}

std::atomic<const KernelTable*>& active() noexcept {
  static std::atomic<const KernelTable*> table{table_for(best_available_isa())};
  return table;
}

}  // namespace

bool isa_available(Isa isa) noexcept { return table_for(isa) != nullptr; }

Isa best_available_isa() noexcept {
  if (isa_available(Isa::Avx2)) return Isa::Avx2;
  if (isa_available(Isa::Neon)) return Isa::Neon;
  return Isa::Scalar;
}

const KernelTable& kernels_for(Isa isa) {
  const KernelTable* t = table_for(isa);
  if (t == nullptr)
    throw Error(ErrorCode::InvalidInput,
                "kernel variant '" + std::string(to_string(isa)) + "' is not available on this host");
  return *t;
}

const KernelTable& kernels() noexcept { return *active().load(std::memory_order_acquire); }

void select_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_release); }

}  // namespace saekit::simd
