#include "relbench/common/hash.hpp"

#include <openssl/evp.h>

#include <array>
#include <memory>

#include "relbench/common/error.hpp"

namespace relbench {
namespace {

struct MdCtxDeleter {
  void operator()(EVP_MD_CTX* ctx) const { EVP_MD_CTX_free(ctx); }
};

std::string to_hex(const unsigned char* bytes, unsigned int len) {
  static constexpr char kDigits[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kDigits[bytes[i] >> 4]);
    out.push_back(kDigits[bytes[i] & 0x0f]);
  }
  return out;
}

}  // namespace

std::string sha256_fields(const std::vector<std::string_view>& parts) {
  std::unique_ptr<EVP_MD_CTX, MdCtxDeleter> ctx(EVP_MD_CTX_new());
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error(ErrorCode::kIo, "sha256 init failed");
  }
  static constexpr char kSep = '\0';
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i > 0) EVP_DigestUpdate(ctx.get(), &kSep, 1);
    EVP_DigestUpdate(ctx.get(), parts[i].data(), parts[i].size());
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> digest{};
  unsigned int len = 0;
  if (EVP_DigestFinal_ex(ctx.get(), digest.data(), &len) != 1) {
    throw Error(ErrorCode::kIo, "sha256 final failed");
  }
  return to_hex(digest.data(), len);
}

std::string sha256_hex(std::string_view data) { return sha256_fields({data}); }

}  // namespace relbench
