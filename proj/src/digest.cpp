#include "spdetaylor/digest.hpp"

#include <array>

#include <openssl/evp.h>

#include "spdetaylor/error.hpp"

namespace spdetaylor
{
struct Sha256::Impl
{
    EVP_MD_CTX* ctx = nullptr;
    bool done = false;
};

Sha256::Sha256() : impl_(std::make_unique<Impl>())
{
    impl_->ctx = EVP_MD_CTX_new();
    if (!impl_->ctx || EVP_DigestInit_ex(impl_->ctx, EVP_sha256(), nullptr) != 1)
        fail(ErrorCode::AssertionFailed, "cannot initialise SHA-256");
}

Sha256::~Sha256()
{
    if (impl_)
        EVP_MD_CTX_free(impl_->ctx);
}

Sha256::Sha256(Sha256&&) noexcept = default;
Sha256& Sha256::operator=(Sha256&&) noexcept = default;

void Sha256::update(void const* data, std::size_t bytes)
{
    if (impl_->done)
        fail(ErrorCode::InvalidArgument, "digest already finalised");
    EVP_DigestUpdate(impl_->ctx, data, bytes);
}

std::string Sha256::hex_digest()
{
    std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
    unsigned len = 0;
    EVP_DigestFinal_ex(impl_->ctx, md.data(), &len);
    impl_->done = true;
    static char const* hex = "0123456789abcdef";
    std::string out;
    for (unsigned i = 0; i < len; ++i)
    {
        out += hex[md[i] >> 4];
        out += hex[md[i] & 15];
    }
    return out;
}

std::string sha256_hex(std::string_view text)
{
    Sha256 h;
    h.update(text);
    return h.hex_digest();
}
}  // namespace spdetaylor
