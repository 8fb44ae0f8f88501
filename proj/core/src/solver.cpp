namespace kinetics {}
