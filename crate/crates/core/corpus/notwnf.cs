default: const 0
