# Channel tests package
