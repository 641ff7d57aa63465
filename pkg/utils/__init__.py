# Logging, seeding and worker-pool helpers
