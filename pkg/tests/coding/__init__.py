# Coding tests package
