#include <exception>
#include <iostream>

#include "app.hpp"
#include "losscap/errors.hpp"

int main(int argc, char** argv) {
  try {
    return losscap_cli::run(argc, argv);
  } catch (const losscap::NumericError& e) {
    std::cerr << "losscap: numeric failure: " << e.what() << "\n";
    return 3;
  } catch (const losscap::ValidationError& e) {
    std::cerr << "losscap: " << e.what() << "\n";
    return 2;
  } catch (const losscap::ConfigError& e) {
    std::cerr << "losscap: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "losscap: unexpected error: " << e.what() << "\n";
    return 1;
  }
}
