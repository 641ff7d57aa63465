# Receivers tests package
