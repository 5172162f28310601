#include "p3rnn/common.hpp"

namespace p3rnn {

const std::vector<std::string>& electrode_names() {
    static const std::vector<std::string> names = {
        "Fp1", "Fp2", "AF3", "AF4", "F7",  "F3",  "Fz",  "F4",
        "F8",  "FC5", "FC1", "FC2", "FC6", "T7",  "C3",  "Cz",
        "C4",  "T8",  "CP5", "CP1", "CP2", "CP6", "P7",  "P3",
        "Pz",  "P4",  "P8",  "PO3", "PO4", "O1",  "Oz",  "O2"};
    return names;
}

int electrode_index(const std::string& name) {
    const auto& names = electrode_names();
    for (size_t i = 0; i < names.size(); ++i)
        if (names[i] == name) return static_cast<int>(i);
    return -1;
}

std::string fmt_g(double v, int sig_digits) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.*g", sig_digits, v);
    return buf;
}

} // namespace p3rnn
