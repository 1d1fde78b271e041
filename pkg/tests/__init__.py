# Tests package for gammakit
