#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "feedback_lab/cli.hpp"

int main(int argc, char** argv) {
    try {
        const std::vector<std::string> args(argv + 1, argv + argc);
        return feedback_lab::run_from_spec(feedback_lab::parse_run_spec(args));
    } catch (const feedback_lab::HelpRequested& help) {
        std::cout << help.text;
        return 0;
    } catch (const feedback_lab::UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
