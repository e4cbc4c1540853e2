// Mutation fuzzer for the CSAM decoder. Built with AddressSanitizer so any
// read past the input buffer aborts the run.
//
//   fuzz_codec [--seconds N] [--iterations N] [--seed N]

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <string>

#include "csam/codec.hpp"
#include "support/message_gen.hpp"
#include "support/mutate.hpp"

using namespace csam;


int main(int argc, char** argv) {
    double seconds = 60.0;
    long long iterations = -1;
    std::uint64_t seed = 1;
    for (int i = 1; i + 1 < argc; i += 2) {
        const std::string flag = argv[i];
        if (flag == "--seconds") seconds = std::atof(argv[i + 1]);
        else if (flag == "--iterations") iterations = std::atoll(argv[i + 1]);
        else if (flag == "--seed") seed = std::strtoull(argv[i + 1], nullptr, 10);
        else {
            std::fprintf(stderr, "unknown flag %s\n", argv[i]);
            return 2;
        }
    }

    const CodecLayout layout{};
    Rng rng(seed);
    const auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(seconds);
    long long runs = 0, accepted = 0, rejected = 0;
    while ((iterations < 0 || runs < iterations) && std::chrono::steady_clock::now() < deadline) {
        for (int batch = 0; batch < 256; ++batch, ++runs) {
            const auto msg = testing::random_message(rng, layout, 12, 4, 6);
            const auto input = testing::mutate(encode(msg, layout), rng);
            // Exact-size heap copy so ASan sees any over-read.
            auto* buf = static_cast<std::uint8_t*>(std::malloc(input.size() ? input.size() : 1));
            if (!input.empty()) std::memcpy(buf, input.data(), input.size());
            try {
                const CsamMessage got = decode({buf, input.size()}, layout);
                ++accepted;
                if (encoded_size(got, layout) != input.size()) {
                    std::fprintf(stderr, "size mismatch after decode: %zu vs %zu\n", encoded_size(got, layout), input.size());
                    return 1;
                }
                (void)encode(got, layout);
            } catch (const DecodeError& e) {
                ++rejected;
                if (e.offset() > input.size()) {
                    std::fprintf(stderr, "error offset %zu past input size %zu\n", e.offset(), input.size());
                    return 1;
                }
            }
            std::free(buf);
        }
    }
    std::printf("fuzz_codec: %lld inputs, %lld decoded, %lld rejected, no over-reads\n", runs, accepted, rejected);
    return 0;
}
