# Tests para la aplicación partitions
