// Walks one restoration run: recommend, report an outcome, replan.
//
//   restoration_walkthrough data/scenario1.json

#include "resto/resto.hpp"

#include <iostream>

int main(int argc, char** argv) {
    if (argc != 2) {
        std::cerr << "usage: " << argv[0] << " <scenario.json>\n";
        return 2;
    }
    try {
        resto::Session s = resto::start_session(resto::load_scenario_file(argv[1]));
        std::cout << "start " << s.current_state().to_string() << "  expected steps " << s.current_value() << '\n';
        std::cout << "nominal " << resto::to_string(s.expected_sequence()) << '\n';

        // Every closure succeeds except the first multi-branch action, whose
        // lowest branch is found damaged.
        bool damaged_one = false;
        while (auto a = s.recommend()) {
            resto::Observation obs{*a, {}};
            for (auto j : *a) obs.outcomes[j] = resto::Status::E;
            if (!damaged_one && a->size() > 1) {
                obs.outcomes[a->branches().front()] = resto::Status::D;
                damaged_one = true;
            }
            s.apply_observation(obs);
            std::cout << "close " << a->to_string() << " -> " << s.current_state().to_string() << "  remaining "
                      << s.current_value() << "  then " << resto::to_string(s.expected_sequence()) << '\n';
        }
    } catch (const resto::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
}
