#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

namespace spdetaylor
{
//! Incremental SHA-256.
class Sha256
{
  public:
    Sha256();
    ~Sha256();
    Sha256(Sha256&&) noexcept;
    Sha256& operator=(Sha256&&) noexcept;

    void update(void const* data, std::size_t bytes);
    void update(std::string_view text) { update(text.data(), text.size()); }
    //! Lowercase hex; the object cannot be updated afterwards.
    std::string hex_digest();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

std::string sha256_hex(std::string_view text);
}  // namespace spdetaylor
