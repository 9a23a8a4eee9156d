// Regenerates the golden prompt renders under tests/golden/. Run manually
// after an intentional template change, then review the diff by eye against
// the documented templates before committing.

#include <filesystem>
#include <fstream>
#include <iostream>

#include "support/golden_fixtures.hpp"

int main(int argc, char** argv) {
    std::filesystem::path dir = argc > 1 ? argv[1] : WVQA_TESTS_DIR "/golden";
    std::filesystem::create_directories(dir);

    auto write = [&](const std::string& name, const std::string& content) {
        std::ofstream out(dir / name, std::ios::binary);
        out << content;
        std::cout << "wrote " << (dir / name).string() << " (" << content.size() << " bytes)\n";
    };

    write("fewshot_prompt.txt", golden::render(golden::fewshot_bundle()));
    write("classification_prompt.txt", golden::render(golden::classification_bundle()));
    write("gated_response_prompt.txt", golden::render(golden::gated_response_bundle()));
    write("judge_prompt.txt", golden::render(golden::judge_bundle()));
    return 0;
}
